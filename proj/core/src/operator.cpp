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

#include "dataprep/operator.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "dataprep/digest.hpp"
#include "dataprep/text_util.hpp"

namespace dataprep {
namespace {

constexpr std::pair<Category, std::string_view> kCategoryNames[] = {
    {Category::kGenerateField, "generate_field"},
    {Category::kGenerateRows, "generate_rows"},
    {Category::kEvaluateSample, "evaluate_sample"},
    {Category::kEvaluateDataset, "evaluate_dataset"},
    {Category::kFilter, "filter"},
    {Category::kRefine, "refine"},
};

constexpr std::pair<Modality, std::string_view> kModalityNames[] = {
    {Modality::kText, "text"},
    {Modality::kVisual, "visual"},
    {Modality::kDocument, "document"},
};

constexpr std::pair<Tier, std::string_view> kTierNames[] = {
    {Tier::kCore, "core"},
    {Tier::kDomain, "domain"},
};

template <typename E, std::size_t N>
std::string_view name_of(const std::pair<E, std::string_view> (&table)[N], E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> value_of(const std::pair<E, std::string_view> (&table)[N],
                          std::string_view name) {
  for (const auto& [e, n] : table) {
    if (n == name) return e;
  }
  return std::nullopt;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

Json role_kind_json(const std::optional<Kind>& kind) {
  return kind ? Json(std::string(to_string(*kind))) : Json("any");
}

// Digest of the given columns, row by row. Used to prove that run() left
// unbound columns alone.
std::vector<std::string> row_digests(const Dataset& data,
                                     const std::vector<std::string>& columns) {
  std::vector<std::size_t> idx;
  for (const auto& c : columns) idx.push_back(*data.column_index(c));
  std::vector<std::string> out;
  out.reserve(data.row_count());
  for (std::size_t r = 0; r < data.row_count(); ++r) {
    Json cells = Json::array();
    for (auto i : idx) cells.push_back(data.at(r, i).json());
    out.push_back(sha256_hex(cells.dump()));
  }
  return out;
}

bool is_subsequence(const std::vector<std::string>& small,
                    const std::vector<std::string>& big) {
  std::size_t j = 0;
  for (const auto& s : small) {
    while (j < big.size() && big[j] != s) ++j;
    if (j == big.size()) return false;
    ++j;
  }
  return true;
}

}  // namespace

std::string_view to_string(Category c) { return name_of(kCategoryNames, c); }
std::string_view to_string(Modality m) { return name_of(kModalityNames, m); }
std::string_view to_string(Tier t) { return name_of(kTierNames, t); }
std::optional<Category> parse_category(std::string_view name) {
  return value_of(kCategoryNames, name);
}
std::optional<Modality> parse_modality(std::string_view name) {
  return value_of(kModalityNames, name);
}
std::optional<Tier> parse_tier(std::string_view name) { return value_of(kTierNames, name); }

std::string_view required_suffix(Category c) {
  switch (c) {
    case Category::kGenerateField: return "Generator";
    case Category::kGenerateRows: return "RowGenerator";
    case Category::kEvaluateSample: return "SampleEvaluator";
    case Category::kEvaluateDataset: return "DatasetEvaluator";
    case Category::kFilter: return "Filter";
    case Category::kRefine: return "Refiner";
  }
  return "";
}

// --- descriptor ---------------------------------------------------------------

const InputRole* OperatorDescriptor::input_role(std::string_view role) const {
  for (const auto& r : input_roles) {
    if (r.name == role) return &r;
  }
  return nullptr;
}

const OutputRole* OperatorDescriptor::output_role(std::string_view role) const {
  for (const auto& r : output_roles) {
    if (r.name == role) return &r;
  }
  return nullptr;
}

void OperatorDescriptor::validate() const {
  auto fail = [&](const std::string& msg) {
    throw Error(Errc::kInvalidDescriptor, name + ": " + msg);
  };
  if (name.empty()) throw Error(Errc::kInvalidDescriptor, "operator name is empty");
  std::set<std::string> seen;
  for (const auto& r : input_roles) {
    if (r.name.empty()) fail("empty role name");
    if (!seen.insert(r.name).second) fail("duplicate role '" + r.name + "'");
  }
  for (const auto& r : output_roles) {
    if (r.name.empty()) fail("empty role name");
    if (!seen.insert(r.name).second) fail("duplicate role '" + r.name + "'");
  }
  if (requires_serving && allowed_prompt_templates.empty()) {
    fail("requires serving but lists no prompt templates");
  }
  if (output_roles.empty() && category != Category::kEvaluateDataset) {
    fail("no output roles");
  }
}

Json OperatorDescriptor::to_json() const {
  Json inputs = Json::array();
  for (const auto& r : input_roles) {
    Json j = {{"name", r.name}, {"kind", role_kind_json(r.kind)}, {"required", r.required}};
    if (r.variadic) j["variadic"] = true;
    inputs.push_back(std::move(j));
  }
  Json outputs = Json::array();
  for (const auto& r : output_roles) {
    Json j = {{"name", r.name}, {"kind", std::string(to_string(r.kind))}};
    if (r.in_place) j["in_place"] = true;
    if (r.optional) j["optional"] = true;
    outputs.push_back(std::move(j));
  }
  Json j = {
      {"name", name},
      {"category", std::string(to_string(category))},
      {"modality", std::string(to_string(modality))},
      {"tier", std::string(to_string(tier))},
      {"input_roles", std::move(inputs)},
      {"output_roles", std::move(outputs)},
      {"allowed_prompt_templates", allowed_prompt_templates},
      {"requires_serving", requires_serving},
  };
  if (converter) j["converter"] = true;
  if (!resources.empty()) j["resources"] = resources;
  if (!description.empty()) j["description"] = description;
  return j;
}

OperatorDescriptor OperatorDescriptor::from_json(const Json& json) {
  auto bad = [](const std::string& msg) { return Error(Errc::kInvalidDescriptor, msg); };
  if (!json.is_object()) throw bad("descriptor must be an object");
  OperatorDescriptor d;
  try {
    d.name = json.at("name").get<std::string>();
    auto cat = parse_category(json.at("category").get<std::string>());
    if (!cat) throw bad(d.name + ": unknown category");
    d.category = *cat;
    if (json.contains("modality")) {
      auto m = parse_modality(json["modality"].get<std::string>());
      if (!m) throw bad(d.name + ": unknown modality");
      d.modality = *m;
    }
    if (json.contains("tier")) {
      auto t = parse_tier(json["tier"].get<std::string>());
      if (!t) throw bad(d.name + ": unknown tier");
      d.tier = *t;
    }
    for (const auto& r : json.value("input_roles", Json::array())) {
      InputRole role;
      role.name = r.at("name").get<std::string>();
      auto kind = r.value("kind", std::string("any"));
      if (kind != "any") {
        role.kind = parse_kind(kind);
        if (!role.kind) throw bad(d.name + ": unknown kind '" + kind + "'");
      }
      role.required = r.value("required", true);
      role.variadic = r.value("variadic", false);
      d.input_roles.push_back(std::move(role));
    }
    for (const auto& r : json.value("output_roles", Json::array())) {
      OutputRole role;
      role.name = r.at("name").get<std::string>();
      auto kind = parse_kind(r.value("kind", std::string("text")));
      if (!kind) throw bad(d.name + ": unknown output kind");
      role.kind = *kind;
      role.in_place = r.value("in_place", false);
      role.optional = r.value("optional", false);
      d.output_roles.push_back(std::move(role));
    }
    d.allowed_prompt_templates =
        json.value("allowed_prompt_templates", std::vector<std::string>{});
    d.requires_serving = json.value("requires_serving", false);
    d.converter = json.value("converter", false);
    d.resources = json.value("resources", std::vector<std::string>{});
    d.description = json.value("description", std::string{});
  } catch (const Json::exception& e) {
    throw bad(std::string("bad descriptor: ") + e.what());
  }
  return d;
}

std::optional<std::string> check_naming(const OperatorDescriptor& d) {
  auto suffix = required_suffix(d.category);
  bool ok = ends_with(d.name, suffix) && d.name.size() > suffix.size();
  if (ok && d.category == Category::kGenerateField && ends_with(d.name, "RowGenerator")) {
    return d.name + ": generate_field operators must not end in \"RowGenerator\"";
  }
  if (!ok) {
    return d.name + ": " + std::string(to_string(d.category)) + " operators must end in \"" +
           std::string(suffix) + "\"";
  }
  return std::nullopt;
}

// --- bindings -----------------------------------------------------------------

KeyBinding binding_from_json(const Json& json) {
  if (json.is_null()) return {};
  if (!json.is_object()) {
    throw Error(Errc::kInvalidConfig, "bindings must be an object");
  }
  KeyBinding b;
  for (const auto& [role, value] : json.items()) {
    if (value.is_string()) {
      b[role] = {value.get<std::string>()};
    } else if (value.is_array()) {
      auto& cols = b[role];
      for (const auto& v : value) {
        if (!v.is_string()) {
          throw Error(Errc::kInvalidConfig, "binding for '" + role + "' must list column names");
        }
        cols.push_back(v.get<std::string>());
      }
    } else {
      throw Error(Errc::kInvalidConfig, "binding for '" + role + "' must be a column name");
    }
  }
  return b;
}

Json to_json(const KeyBinding& binding) {
  Json j = Json::object();
  for (const auto& [role, cols] : binding) {
    j[role] = cols.size() == 1 ? Json(cols.front()) : Json(cols);
  }
  return j;
}

std::vector<BindingProblem> check_binding(const OperatorDescriptor& d, const KeyBinding& b) {
  std::vector<BindingProblem> out;
  for (const auto& [role, cols] : b) {
    if (d.input_role(role) == nullptr && d.output_role(role) == nullptr) {
      out.push_back({role, "role '" + role + "' is not declared by " + d.name});
    }
  }
  for (const auto& r : d.input_roles) {
    auto it = b.find(r.name);
    if (it == b.end() || it->second.empty()) {
      if (r.required) out.push_back({r.name, "required input role '" + r.name + "' is unbound"});
      continue;
    }
    if (!r.variadic && it->second.size() != 1) {
      out.push_back({r.name, "input role '" + r.name + "' takes exactly one column"});
    }
    for (const auto& c : it->second) {
      if (c.empty()) out.push_back({r.name, "input role '" + r.name + "' binds an empty name"});
    }
  }
  std::map<std::string, std::string> claimed;
  for (const auto& r : d.output_roles) {
    auto it = b.find(r.name);
    if (it == b.end() || it->second.empty()) {
      if (!r.optional) out.push_back({r.name, "output role '" + r.name + "' is unbound"});
      continue;
    }
    if (it->second.size() != 1 || it->second.front().empty()) {
      out.push_back({r.name, "output role '" + r.name + "' takes exactly one column"});
      continue;
    }
    const auto& col = it->second.front();
    auto [pos, fresh] = claimed.emplace(col, r.name);
    if (!fresh) {
      BindingProblem p{r.name,
                       "output roles '" + pos->second + "' and '" + r.name +
                           "' both bind column '" + col + "'"};
      p.duplicate_output = true;
      out.push_back(std::move(p));
    }
  }
  return out;
}

// --- reports ------------------------------------------------------------------

Json RunReport::to_json() const {
  Json j = {{"rows_in", rows_in},
            {"rows_out", rows_out},
            {"columns_added", columns_added},
            {"failures", failures}};
  if (dataset_metrics) {
    Json m = Json::object();
    for (const auto& [k, v] : *dataset_metrics) m[k] = v;
    j["dataset_metrics"] = std::move(m);
  }
  if (!details.empty()) j["details"] = details;
  return j;
}

RunReport RunReport::from_json(const Json& json) {
  RunReport r;
  r.rows_in = json.value("rows_in", std::size_t{0});
  r.rows_out = json.value("rows_out", std::size_t{0});
  r.columns_added = json.value("columns_added", std::vector<std::string>{});
  r.failures = json.value("failures", std::size_t{0});
  if (json.contains("dataset_metrics")) {
    std::map<std::string, double> m;
    for (const auto& [k, v] : json["dataset_metrics"].items()) m[k] = v.get<double>();
    r.dataset_metrics = std::move(m);
  }
  r.details = json.value("details", Json::object());
  return r;
}

std::optional<std::string> check_category_law(const RunReport& r, Category category,
                                              const std::vector<std::string>& declared) {
  auto counts = " (rows_in=" + std::to_string(r.rows_in) +
                ", rows_out=" + std::to_string(r.rows_out) + ")";
  switch (category) {
    case Category::kFilter: {
      if (r.rows_out > r.rows_in) return "filter increased the row count" + counts;
      for (const auto& c : r.columns_added) {
        if (std::find(declared.begin(), declared.end(), c) == declared.end()) {
          return "filter added undeclared column '" + c + "'";
        }
      }
      return std::nullopt;
    }
    case Category::kRefine:
      if (r.rows_out != r.rows_in) return "refiner changed the row count" + counts;
      if (!r.columns_added.empty()) return "refiner added columns";
      return std::nullopt;
    case Category::kEvaluateSample:
      if (r.rows_out != r.rows_in) return "sample evaluator changed the row count" + counts;
      if (r.columns_added.empty()) return "sample evaluator added no column";
      return std::nullopt;
    case Category::kEvaluateDataset:
      if (r.rows_out != r.rows_in) return "dataset evaluator changed the row count" + counts;
      if (!r.dataset_metrics || r.dataset_metrics->empty()) {
        return "dataset evaluator produced no metrics";
      }
      return std::nullopt;
    case Category::kGenerateField:
      if (r.rows_out != r.rows_in) return "generator changed the row count" + counts;
      if (r.columns_added.empty()) return "generator added no column";
      return std::nullopt;
    case Category::kGenerateRows:
      if (r.rows_out < r.rows_in) return "row generator reduced the row count" + counts;
      return std::nullopt;
  }
  return std::nullopt;
}

// --- run context ----------------------------------------------------------------

RunContext::RunContext(const OperatorDescriptor& descriptor, StorageSession& storage,
                       const KeyBinding& binding, const ServingClient* serving,
                       const ResourceSet& resources, std::uint64_t seed)
    : descriptor_(descriptor),
      storage_(storage),
      binding_(binding),
      serving_(serving),
      resources_(resources),
      seed_(seed),
      rng_(seed) {}

bool RunContext::bound(std::string_view role) const {
  auto it = binding_.find(std::string(role));
  return it != binding_.end() && !it->second.empty();
}

const std::vector<std::string>& RunContext::columns(std::string_view role) const {
  auto it = binding_.find(std::string(role));
  if (it == binding_.end() || it->second.empty()) {
    throw Error(Errc::kBindingIncomplete,
                descriptor_.name + ": role '" + std::string(role) + "' is unbound");
  }
  return it->second;
}

const std::string& RunContext::column(std::string_view role) const {
  return columns(role).front();
}

const ServingClient& RunContext::serving() const {
  if (serving_ == nullptr) {
    throw Error(Errc::kServingMismatch, descriptor_.name + ": no serving backend provided");
  }
  return *serving_;
}

void RunContext::enforce_failure_rate(std::size_t failed, std::size_t total,
                                      double max_rate) const {
  if (total == 0 || failed == 0) return;
  double rate = static_cast<double>(failed) / static_cast<double>(total);
  if (rate > max_rate) {
    throw Error(Errc::kOperatorFailure,
                std::to_string(failed) + " of " + std::to_string(total) +
                    " generations failed, above the allowed rate");
  }
}

// --- registry -----------------------------------------------------------------

std::unique_ptr<Operator> RegistryEntry::configure(const OperatorConfig& config) const {
  if (!factory) {
    throw Error(Errc::kInvalidDescriptor, descriptor.name + ": no behavior registered");
  }
  return factory(descriptor, config);
}

const RegistryEntry& OperatorRegistry::add(OperatorDescriptor descriptor,
                                           OperatorFactory factory) {
  if (auto v = check_naming(descriptor)) throw Error(Errc::kNamingViolation, *v);
  descriptor.validate();
  std::unique_lock lock(mu_);
  if (entries_.count(descriptor.name) != 0) {
    throw Error(Errc::kDuplicateName,
                "operator '" + descriptor.name + "' is already registered");
  }
  auto name = descriptor.name;
  auto entry = std::make_unique<RegistryEntry>(
      RegistryEntry{std::move(descriptor), std::move(factory)});
  auto& ref = *entry;
  entries_.emplace(std::move(name), std::move(entry));
  return ref;
}

const RegistryEntry* OperatorRegistry::find(std::string_view name) const {
  std::function<void(std::string_view)> hook;
  {
    std::shared_lock lock(mu_);
    auto it = entries_.find(name);
    if (it != entries_.end()) return it->second.get();
    hook = on_miss_;
  }
  if (!hook) return nullptr;
  hook(name);
  std::shared_lock lock(mu_);
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : it->second.get();
}

std::vector<const RegistryEntry*> OperatorRegistry::list(const RegistryFilter& f) const {
  std::shared_lock lock(mu_);
  std::vector<const RegistryEntry*> out;
  for (const auto& [name, e] : entries_) {
    const auto& d = e->descriptor;
    if (f.category && d.category != *f.category) continue;
    if (f.modality && d.modality != *f.modality) continue;
    if (f.tier && d.tier != *f.tier) continue;
    out.push_back(e.get());
  }
  return out;
}

Json OperatorRegistry::dump(const RegistryFilter& filter) const {
  Json out = Json::array();
  for (const auto* e : list(filter)) out.push_back(e->descriptor.to_json());
  return out;
}

std::size_t OperatorRegistry::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::vector<std::string> OperatorRegistry::naming_violations() const {
  std::vector<std::string> out;
  for (const auto* e : list()) {
    if (auto v = check_naming(e->descriptor)) out.push_back(*v);
  }
  return out;
}

void OperatorRegistry::set_miss_handler(std::function<void(std::string_view)> handler) {
  std::unique_lock lock(mu_);
  on_miss_ = std::move(handler);
}

// --- run ----------------------------------------------------------------------

RunReport run_operator(const OperatorDescriptor& d, Operator& instance,
                       StorageSession& session, const KeyBinding& binding,
                       const ServingClient* serving, const ResourceSet& resources,
                       std::uint64_t seed) {
  auto problems = check_binding(d, binding);
  if (!problems.empty()) {
    throw Error(Errc::kBindingIncomplete, d.name + ": " + problems.front().message);
  }
  if (d.requires_serving && serving == nullptr) {
    throw Error(Errc::kServingMismatch, d.name + ": requires a serving backend");
  }
  if (!d.requires_serving && serving != nullptr) {
    throw Error(Errc::kServingMismatch, d.name + ": does not use a serving backend");
  }

  Dataset before = session.read();
  for (const auto& r : d.input_roles) {
    auto it = binding.find(r.name);
    if (it == binding.end()) continue;
    for (const auto& col : it->second) {
      if (!before.has_column(col)) throw MissingColumnError(col, before.columns());
      if (r.kind && before.row_count() > 0) {
        const auto& cell = before.at(0, col);
        if (!cell.is_null() && cell.kind() != *r.kind) {
          throw Error(Errc::kKindMismatch,
                      d.name + ": column '" + col + "' holds " +
                          std::string(to_string(cell.kind())) + ", role '" + r.name +
                          "' expects " + std::string(to_string(*r.kind)));
        }
      }
    }
  }

  std::set<std::string> outputs;
  for (const auto& r : d.output_roles) {
    auto it = binding.find(r.name);
    if (it != binding.end()) outputs.insert(it->second.front());
  }
  std::vector<std::string> untouched;
  for (const auto& c : before.columns()) {
    if (outputs.count(c) == 0) untouched.push_back(c);
  }
  bool guard = d.category != Category::kGenerateRows;
  std::vector<std::string> digests_before;
  if (guard) digests_before = row_digests(before, untouched);

  RunContext ctx(d, session, binding, serving, resources, seed);
  try {
    instance.run(ctx);
  } catch (const MissingColumnError&) {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), d.name + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(Errc::kOperatorFailure, d.name + ": " + e.what());
  }

  Dataset after = session.read();
  RunReport report;
  report.rows_in = before.row_count();
  report.rows_out = after.row_count();
  for (const auto& c : after.columns()) {
    if (!before.has_column(c)) report.columns_added.push_back(c);
  }
  report.failures = ctx.failures();
  if (d.category == Category::kEvaluateDataset || !ctx.metrics().empty()) {
    report.dataset_metrics = ctx.metrics();
  }
  report.details = ctx.details();

  if (guard) {
    for (const auto& c : untouched) {
      if (!after.has_column(c)) {
        throw Error(Errc::kOperatorFailure,
                    d.name + ": removed column '" + c + "' it does not own");
      }
    }
    auto digests_after = row_digests(after, untouched);
    bool same = d.category == Category::kFilter ? is_subsequence(digests_after, digests_before)
                                                : digests_after == digests_before;
    if (!same) {
      throw Error(Errc::kOperatorFailure,
                  d.name + ": modified columns not bound to an output role");
    }
  }
  return report;
}

}  // namespace dataprep
