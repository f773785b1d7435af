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

#ifndef DATAPREP_PROMPT_HPP_
#define DATAPREP_PROMPT_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "dataprep/value.hpp"

namespace dataprep {

struct OperatorDescriptor;

struct TemplateSlot {
  std::string name;
  bool required = true;
};

/// Slot name -> fully rendered text.
using PromptContext = std::map<std::string, std::string>;

/// Placeholder names in `body`, in order of first appearance. `{{` and `}}`
/// are literal braces. Throws Error(kInvalidTemplate) on an unbalanced brace
/// or a malformed placeholder name.
std::vector<std::string> extract_placeholders(std::string_view body);

/// A prompt body with `{slot}` placeholders. Construction audits the body
/// against the declared slots.
class PromptTemplate {
 public:
  PromptTemplate(std::string identifier, std::string description,
                 std::vector<TemplateSlot> slots, std::string body,
                 std::optional<std::string> dialect = std::nullopt);

  /// {identifier, description, slots:[{name, required}], body, dialect?}
  static PromptTemplate from_json(const Json& json);
  Json to_json() const;

  /// Substitutes each placeholder. Absent optional slots render empty. In
  /// strict mode a context key that is not a declared slot is an error.
  std::string build_prompt(const PromptContext& context, bool strict = false) const;

  const std::string& identifier() const { return identifier_; }
  const std::string& description() const { return description_; }
  const std::vector<TemplateSlot>& slots() const { return slots_; }
  const std::string& body() const { return body_; }
  const std::optional<std::string>& dialect() const { return dialect_; }
  std::set<std::string> slot_names() const;

 private:
  std::string identifier_;
  std::string description_;
  std::vector<TemplateSlot> slots_;
  std::string body_;
  std::optional<std::string> dialect_;
};

class TemplateRegistry {
 public:
  TemplateRegistry() = default;
  TemplateRegistry(const TemplateRegistry& other);
  TemplateRegistry& operator=(const TemplateRegistry&) = delete;

  /// The templates shipped with the library.
  static TemplateRegistry with_builtins();

  /// Throws Error(kDuplicateName) if the identifier is taken.
  void add(PromptTemplate tmpl);
  /// Loads every *.json file in `dir`, sorted by file name.
  void load_directory(const std::filesystem::path& dir);

  std::shared_ptr<const PromptTemplate> lookup(std::string_view identifier) const;
  const PromptTemplate* find(std::string_view identifier) const;
  /// Throws Error(kUnknownTemplate).
  const PromptTemplate& get(std::string_view identifier) const;
  std::vector<const PromptTemplate*> list() const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<const PromptTemplate>, std::less<>> templates_;
};

/// An operator's configured template. Fixed at configuration time.
struct BoundTemplate {
  std::string operator_name;
  std::shared_ptr<const PromptTemplate> tmpl;
};

/// Succeeds iff `template_id` is registered and listed in the operator's
/// allowed templates. Throws kUnknownTemplate or kIncompatibleTemplate.
BoundTemplate bind_template(const OperatorDescriptor& op, std::string_view template_id,
                            const TemplateRegistry& registry);

}  // namespace dataprep

#endif  // DATAPREP_PROMPT_HPP_
