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

#include "dataprep/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <sstream>

#include "dataprep/errors.hpp"
#include "dataprep/operator.hpp"

namespace dataprep {

namespace assets {
const std::vector<std::string_view>& template_sources();
}

namespace {

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

enum class PieceKind { kLiteral, kSlot };
struct Piece {
  PieceKind kind;
  std::string text;
};

std::vector<Piece> parse_body(std::string_view body) {
  std::vector<Piece> pieces;
  std::string literal;
  std::size_t i = 0;
  auto bad = [&](const std::string& why) {
    return Error(Errc::kInvalidTemplate,
                 "template body: " + why + " at offset " + std::to_string(i));
  };
  while (i < body.size()) {
    const char c = body[i];
    if (c == '{') {
      if (i + 1 < body.size() && body[i + 1] == '{') {
        literal.push_back('{');
        i += 2;
        continue;
      }
      const auto close = body.find('}', i + 1);
      if (close == std::string_view::npos) throw bad("unclosed '{'");
      const std::string_view name = body.substr(i + 1, close - i - 1);
      if (name.empty() || !std::all_of(name.begin(), name.end(), is_name_char)) {
        throw bad("malformed placeholder '{" + std::string(name) + "}'");
      }
      if (!literal.empty()) pieces.push_back({PieceKind::kLiteral, std::move(literal)});
      literal.clear();
      pieces.push_back({PieceKind::kSlot, std::string(name)});
      i = close + 1;
      continue;
    }
    if (c == '}') {
      if (i + 1 < body.size() && body[i + 1] == '}') {
        literal.push_back('}');
        i += 2;
        continue;
      }
      throw bad("stray '}'");
    }
    literal.push_back(c);
    ++i;
  }
  if (!literal.empty()) pieces.push_back({PieceKind::kLiteral, std::move(literal)});
  return pieces;
}

}  // namespace

std::vector<std::string> extract_placeholders(std::string_view body) {
  std::vector<std::string> names;
  for (const auto& p : parse_body(body)) {
    if (p.kind == PieceKind::kSlot &&
        std::find(names.begin(), names.end(), p.text) == names.end()) {
      names.push_back(p.text);
    }
  }
  return names;
}

PromptTemplate::PromptTemplate(std::string identifier, std::string description,
                               std::vector<TemplateSlot> slots, std::string body,
                               std::optional<std::string> dialect)
    : identifier_(std::move(identifier)),
      description_(std::move(description)),
      slots_(std::move(slots)),
      body_(std::move(body)),
      dialect_(std::move(dialect)) {
  if (identifier_.empty()) throw Error(Errc::kInvalidTemplate, "template identifier is empty");
  std::set<std::string> declared;
  for (const auto& s : slots_) {
    if (!declared.insert(s.name).second) {
      throw Error(Errc::kInvalidTemplate,
                  identifier_ + ": slot '" + s.name + "' declared twice");
    }
  }
  const auto used = extract_placeholders(body_);
  for (const auto& name : used) {
    if (!declared.count(name)) {
      throw Error(Errc::kInvalidTemplate,
                  identifier_ + ": placeholder '{" + name + "}' is not a declared slot");
    }
  }
  for (const auto& s : slots_) {
    if (std::find(used.begin(), used.end(), s.name) == used.end()) {
      throw Error(Errc::kInvalidTemplate,
                  identifier_ + ": slot '" + s.name + "' never appears in the body");
    }
  }
}

PromptTemplate PromptTemplate::from_json(const Json& j) {
  try {
    std::vector<TemplateSlot> slots;
    for (const auto& s : j.at("slots")) {
      slots.push_back({s.at("name").get<std::string>(), s.value("required", true)});
    }
    std::optional<std::string> dialect;
    if (j.contains("dialect") && j["dialect"].is_string()) dialect = j["dialect"].get<std::string>();
    std::string body;
    const auto& b = j.at("body");
    if (b.is_array()) {
      for (const auto& line : b) body += line.get<std::string>() + "\n";
      if (!body.empty()) body.pop_back();
    } else {
      body = b.get<std::string>();
    }
    return PromptTemplate(j.at("identifier").get<std::string>(), j.value("description", ""),
                          std::move(slots), std::move(body), std::move(dialect));
  } catch (const Json::exception& e) {
    throw Error(Errc::kInvalidTemplate, std::string("template definition: ") + e.what());
  }
}

Json PromptTemplate::to_json() const {
  Json slots = Json::array();
  for (const auto& s : slots_) slots.push_back({{"name", s.name}, {"required", s.required}});
  Json j{{"identifier", identifier_}, {"description", description_}, {"slots", slots}, {"body", body_}};
  if (dialect_) j["dialect"] = *dialect_;
  return j;
}

std::set<std::string> PromptTemplate::slot_names() const {
  std::set<std::string> out;
  for (const auto& s : slots_) out.insert(s.name);
  return out;
}

std::string PromptTemplate::build_prompt(const PromptContext& context, bool strict) const {
  for (const auto& s : slots_) {
    if (s.required && !context.count(s.name)) {
      throw Error(Errc::kMissingSlot,
                  identifier_ + ": missing required slot '" + s.name + "'");
    }
  }
  if (strict) {
    for (const auto& [key, _] : context) {
      const bool known = std::any_of(slots_.begin(), slots_.end(),
                                     [&](const TemplateSlot& s) { return s.name == key; });
      if (!known) {
        throw Error(Errc::kUnknownSlot, identifier_ + ": context key '" + key +
                                            "' is not a slot of this template");
      }
    }
  }
  std::string out;
  for (const auto& p : parse_body(body_)) {
    if (p.kind == PieceKind::kLiteral) {
      out += p.text;
    } else if (auto it = context.find(p.text); it != context.end()) {
      out += it->second;
    }
  }
  return out;
}

TemplateRegistry::TemplateRegistry(const TemplateRegistry& other) {
  std::shared_lock lock(other.mu_);
  templates_ = other.templates_;
}

TemplateRegistry TemplateRegistry::with_builtins() {
  TemplateRegistry reg;
  for (std::string_view src : assets::template_sources()) {
    Json j = Json::parse(src, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::kInvalidTemplate, "builtin template is not JSON");
    reg.add(PromptTemplate::from_json(j));
  }
  return reg;
}

void TemplateRegistry::add(PromptTemplate tmpl) {
  std::unique_lock lock(mu_);
  const std::string id = tmpl.identifier();
  if (templates_.count(id)) {
    throw Error(Errc::kDuplicateName, "template '" + id + "' is already registered");
  }
  templates_.emplace(id, std::make_shared<const PromptTemplate>(std::move(tmpl)));
}

void TemplateRegistry::load_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    Json j = Json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) {
      throw Error(Errc::kInvalidTemplate, "template file '" + f.string() + "' is not JSON");
    }
    add(PromptTemplate::from_json(j));
  }
}

std::shared_ptr<const PromptTemplate> TemplateRegistry::lookup(std::string_view id) const {
  std::shared_lock lock(mu_);
  auto it = templates_.find(id);
  return it == templates_.end() ? nullptr : it->second;
}

const PromptTemplate* TemplateRegistry::find(std::string_view id) const {
  return lookup(id).get();
}

const PromptTemplate& TemplateRegistry::get(std::string_view id) const {
  const PromptTemplate* t = find(id);
  if (t == nullptr) {
    throw Error(Errc::kUnknownTemplate, "unknown template '" + std::string(id) + "'");
  }
  return *t;
}

std::vector<const PromptTemplate*> TemplateRegistry::list() const {
  std::shared_lock lock(mu_);
  std::vector<const PromptTemplate*> out;
  for (const auto& [_, t] : templates_) out.push_back(t.get());
  return out;
}

std::size_t TemplateRegistry::size() const {
  std::shared_lock lock(mu_);
  return templates_.size();
}

BoundTemplate bind_template(const OperatorDescriptor& op, std::string_view template_id,
                            const TemplateRegistry& registry) {
  auto tmpl = registry.lookup(template_id);
  if (!tmpl) {
    throw Error(Errc::kUnknownTemplate, "unknown template '" + std::string(template_id) + "'");
  }
  const auto& allowed = op.allowed_prompt_templates;
  if (std::find(allowed.begin(), allowed.end(), template_id) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw Error(Errc::kIncompatibleTemplate, op.name + " cannot use template '" +
                                                 std::string(template_id) +
                                                 "' (allowed: {" + list + "})");
  }
  return BoundTemplate{op.name, std::move(tmpl)};
}

}  // namespace dataprep
