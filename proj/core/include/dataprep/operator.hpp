// Copyright 2026 The dataprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DATAPREP_OPERATOR_HPP_
#define DATAPREP_OPERATOR_HPP_

#include <any>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "dataprep/errors.hpp"
#include "dataprep/prompt.hpp"
#include "dataprep/serving.hpp"
#include "dataprep/storage.hpp"
#include "dataprep/value.hpp"

namespace dataprep {

enum class Category {
  kGenerateField,
  kGenerateRows,
  kEvaluateSample,
  kEvaluateDataset,
  kFilter,
  kRefine,
};
enum class Modality { kText, kVisual, kDocument };
enum class Tier { kCore, kDomain };

std::string_view to_string(Category c);
std::string_view to_string(Modality m);
std::string_view to_string(Tier t);
std::optional<Category> parse_category(std::string_view name);
std::optional<Modality> parse_modality(std::string_view name);
std::optional<Tier> parse_tier(std::string_view name);

/// Name suffix an operator of category `c` must carry.
std::string_view required_suffix(Category c);

struct InputRole {
  std::string name;
  std::optional<Kind> kind;  // nullopt accepts any kind
  bool required = true;
  bool variadic = false;     // binds one or more columns
};

struct OutputRole {
  std::string name;
  Kind kind = Kind::kText;
  bool in_place = false;     // rewrites an existing column instead of adding one
  bool optional = false;     // may be left unbound; nothing is written then
};

struct OperatorDescriptor {
  std::string name;
  Category category = Category::kRefine;
  Modality modality = Modality::kText;
  Tier tier = Tier::kCore;
  std::vector<InputRole> input_roles;
  std::vector<OutputRole> output_roles;
  std::vector<std::string> allowed_prompt_templates;
  bool requires_serving = false;
  bool converter = false;
  std::vector<std::string> resources;
  std::string description;

  const InputRole* input_role(std::string_view role) const;
  const OutputRole* output_role(std::string_view role) const;

  /// Structural invariants (unique roles, serving implies templates, outputs
  /// present unless evaluate_dataset). Throws Error(kInvalidDescriptor).
  void validate() const;

  Json to_json() const;
  static OperatorDescriptor from_json(const Json& json);
};

/// nullopt when the name carries the suffix its category requires, else a
/// message naming the expected suffix.
std::optional<std::string> check_naming(const OperatorDescriptor& descriptor);

/// Role name -> bound column(s). Non-variadic roles bind exactly one column.
using KeyBinding = std::map<std::string, std::vector<std::string>>;

KeyBinding binding_from_json(const Json& json);
Json to_json(const KeyBinding& binding);

struct BindingProblem {
  std::string role;
  std::string message;
  bool duplicate_output = false;
};

/// Every way `binding` fails to satisfy `descriptor`.
std::vector<BindingProblem> check_binding(const OperatorDescriptor& descriptor,
                                          const KeyBinding& binding);

struct RunReport {
  std::size_t rows_in = 0;
  std::size_t rows_out = 0;
  std::vector<std::string> columns_added;
  std::optional<std::map<std::string, double>> dataset_metrics;
  std::size_t failures = 0;
  Json details = Json::object();

  Json to_json() const;
  static RunReport from_json(const Json& json);
};

/// nullopt when `report` obeys the row/column law of `category`. Filters may
/// add only columns listed in `declared_outputs`.
std::optional<std::string> check_category_law(
    const RunReport& report, Category category,
    const std::vector<std::string>& declared_outputs = {});

/// Named, type-erased runtime resources (database connections and the like).
class ResourceSet {
 public:
  template <typename T>
  void put(const std::string& name, std::shared_ptr<T> value) {
    items_[name] = std::move(value);
  }

  template <typename T>
  std::shared_ptr<T> get(const std::string& name) const {
    auto it = items_.find(name);
    if (it == items_.end()) {
      throw Error(Errc::kInvalidConfig, "resource '" + name + "' is not configured");
    }
    const auto* p = std::any_cast<std::shared_ptr<T>>(&it->second);
    if (p == nullptr) {
      throw Error(Errc::kInvalidConfig, "resource '" + name + "' has an unexpected type");
    }
    return *p;
  }

  bool has(const std::string& name) const { return items_.count(name) != 0; }

 private:
  std::map<std::string, std::any> items_;
};

/// Configuration handed to a factory. Construction must not touch storage.
struct OperatorConfig {
  Json params = Json::object();
  std::optional<std::string> template_id;
  const TemplateRegistry* templates = nullptr;

  template <typename T>
  T param(const char* key, T fallback) const;
};

/// What an operator sees while running: its session, bound columns, and the
/// optional serving client and resources. Collects the report fields that
/// only the operator knows (failures, dataset metrics, details).
class RunContext {
 public:
  RunContext(const OperatorDescriptor& descriptor, StorageSession& storage,
             const KeyBinding& binding, const ServingClient* serving,
             const ResourceSet& resources, std::uint64_t seed);

  const OperatorDescriptor& descriptor() const { return descriptor_; }
  StorageSession& storage() { return storage_; }

  bool bound(std::string_view role) const;
  /// The single column bound to `role`. Throws kBindingIncomplete.
  const std::string& column(std::string_view role) const;
  const std::vector<std::string>& columns(std::string_view role) const;

  const ServingClient& serving() const;

  template <typename T>
  std::shared_ptr<T> resource(const std::string& name) const {
    return resources_.get<T>(name);
  }

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& rng() { return rng_; }

  void add_failures(std::size_t count) { failures_ += count; }
  std::size_t failures() const { return failures_; }
  void set_metric(const std::string& name, double value) { metrics_[name] = value; }
  const std::map<std::string, double>& metrics() const { return metrics_; }
  Json& details() { return details_; }

  /// Throws kOperatorFailure when failed/total exceeds max_rate.
  void enforce_failure_rate(std::size_t failed, std::size_t total, double max_rate) const;

 private:
  const OperatorDescriptor& descriptor_;
  StorageSession& storage_;
  const KeyBinding& binding_;
  const ServingClient* serving_;
  const ResourceSet& resources_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::size_t failures_ = 0;
  std::map<std::string, double> metrics_;
  Json details_ = Json::object();
};

class Operator {
 public:
  virtual ~Operator() = default;
  virtual void run(RunContext& ctx) = 0;
};

using OperatorFactory =
    std::function<std::unique_ptr<Operator>(const OperatorDescriptor&, const OperatorConfig&)>;

struct RegistryEntry {
  OperatorDescriptor descriptor;
  OperatorFactory factory;

  /// Configures an instance (the first of the two phases).
  std::unique_ptr<Operator> configure(const OperatorConfig& config) const;
};

struct RegistryFilter {
  std::optional<Category> category;
  std::optional<Modality> modality;
  std::optional<Tier> tier;
};

/// Name -> operator. Populated at startup; a miss handler lets extensions be
/// loaded the first time one of their operators is referenced.
class OperatorRegistry {
 public:
  /// Throws kDuplicateName, kNamingViolation or kInvalidDescriptor.
  const RegistryEntry& add(OperatorDescriptor descriptor, OperatorFactory factory);

  const RegistryEntry* find(std::string_view name) const;
  std::vector<const RegistryEntry*> list(const RegistryFilter& filter = {}) const;
  /// JSON array of descriptors, sorted by name.
  Json dump(const RegistryFilter& filter = {}) const;
  std::size_t size() const;

  /// Re-checks every registered name against its category.
  std::vector<std::string> naming_violations() const;

  void set_miss_handler(std::function<void(std::string_view)> handler);

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, std::unique_ptr<RegistryEntry>, std::less<>> entries_;
  std::function<void(std::string_view)> on_miss_;
};

/// Runs one configured operator: checks the binding (before any read), that
/// bound inputs exist, a first-row kind spot check, then read-transform-write
/// through the session. Columns not bound to an output role must come out
/// unchanged. Errors carry the operator name.
RunReport run_operator(const OperatorDescriptor& descriptor, Operator& instance,
                       StorageSession& session, const KeyBinding& binding,
                       const ServingClient* serving, const ResourceSet& resources,
                       std::uint64_t seed);

// --- template definitions ---------------------------------------------------

template <typename T>
T OperatorConfig::param(const char* key, T fallback) const {
  auto it = params.find(key);
  if (it == params.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw Error(Errc::kInvalidConfig, std::string("bad value for parameter '") + key + "'");
  }
}

}  // namespace dataprep

#endif  // DATAPREP_OPERATOR_HPP_
