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

#include "dataprep/extension.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dataprep {
namespace {

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw Error(Errc::kMalformed, path.string() + ": " + e.what());
  }
}

// Placeholder behavior for scaffolded operators: leaves existing columns as
// they are and fills any new output column with nulls.
class IdentityOperator final : public Operator {
 public:
  void run(RunContext& ctx) override {
    const auto rows = ctx.storage().row_count();
    for (const auto& role : ctx.descriptor().output_roles) {
      if (role.in_place || !ctx.bound(role.name)) continue;
      const auto& col = ctx.column(role.name);
      auto existing = ctx.storage().columns();
      if (std::find(existing.begin(), existing.end(), col) != existing.end()) continue;
      ctx.storage().write(NewColumn{col, std::vector<FieldValue>(rows)});
    }
  }
};

ExtensionOperator parse_operator(const Json& j) {
  ExtensionOperator op;
  op.base = j.value("base", std::string("identity"));
  op.defaults = j.value("defaults", Json::object());
  if (!op.defaults.is_object()) {
    throw Error(Errc::kMalformed, "operator defaults must be an object");
  }
  const Json& d = j.at("descriptor");
  if (op.base == "identity") {
    op.descriptor = OperatorDescriptor::from_json(d);
  } else {
    // Roles come from the base at registration time; keep what was given.
    op.descriptor.name = d.at("name").get<std::string>();
    op.descriptor.description = d.value("description", std::string());
  }
  return op;
}

}  // namespace

bool valid_extension_name(std::string_view name) {
  if (name.empty() || !(name[0] >= 'a' && name[0] <= 'z')) return false;
  for (char c : name) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  }
  return true;
}

ExtensionManifest ExtensionManifest::load(const std::filesystem::path& manifest_file) {
  Json j = read_json(manifest_file);
  ExtensionManifest m;
  m.root = manifest_file.parent_path();
  try {
    m.name = j.at("name").get<std::string>();
    m.version = j.value("version", m.version);
    for (const auto& op : j.value("operators", Json::array())) {
      // Either an inline entry or the path of a file holding one.
      m.operators.push_back(parse_operator(op.is_string()
                                               ? read_json(m.root / op.get<std::string>())
                                               : op));
    }
    for (const auto& t : j.value("templates", Json::array())) {
      m.templates.emplace_back(t.get<std::string>());
    }
    for (const auto& p : j.value("pipelines", Json::array())) {
      m.pipelines.emplace_back(p.get<std::string>());
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::kMalformed, manifest_file.string() + ": " + e.what());
  }
  if (!valid_extension_name(m.name)) {
    throw Error(Errc::kMalformed, manifest_file.string() + ": invalid extension name '" +
                                      m.name + "'");
  }
  return m;
}

Json ExtensionManifest::to_json() const {
  Json ops = Json::array();
  for (const auto& op : operators) {
    Json d = op.base == "identity" ? op.descriptor.to_json()
                                   : Json{{"name", op.descriptor.name},
                                          {"description", op.descriptor.description}};
    Json entry = {{"base", op.base}, {"descriptor", d}};
    if (!op.defaults.empty()) entry["defaults"] = op.defaults;
    ops.push_back(std::move(entry));
  }
  Json tmpl = Json::array(), pipes = Json::array();
  for (const auto& t : templates) tmpl.push_back(t.generic_string());
  for (const auto& p : pipelines) pipes.push_back(p.generic_string());
  return {{"name", name}, {"version", version}, {"operators", ops},
          {"templates", tmpl}, {"pipelines", pipes}};
}

std::vector<std::filesystem::path> extension_search_path(const std::vector<std::string>& extra) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : extra) {
    if (!e.empty()) out.emplace_back(e);
  }
  if (const char* env = std::getenv(kExtensionPathEnv)) {
    std::string_view rest(env);
    while (!rest.empty()) {
      auto colon = rest.find(':');
      auto part = rest.substr(0, colon);
      if (!part.empty()) out.emplace_back(std::string(part));
      if (colon == std::string_view::npos) break;
      rest.remove_prefix(colon + 1);
    }
  }
  return out;
}

void register_extension_operator(OperatorRegistry& registry, const ExtensionOperator& op) {
  if (op.base == "identity") {
    registry.add(op.descriptor, [](const OperatorDescriptor&, const OperatorConfig&) {
      return std::make_unique<IdentityOperator>();
    });
    return;
  }
  const RegistryEntry* base = registry.find(op.base);
  if (base == nullptr) {
    throw Error(Errc::kUnknownOperator,
                op.descriptor.name + ": base operator '" + op.base + "' is not registered");
  }
  OperatorDescriptor d = base->descriptor;
  d.name = op.descriptor.name;
  if (!op.descriptor.description.empty()) d.description = op.descriptor.description;
  OperatorFactory base_factory = base->factory;
  OperatorDescriptor base_desc = base->descriptor;
  Json defaults = op.defaults;
  registry.add(std::move(d), [base_factory, base_desc, defaults](const OperatorDescriptor&,
                                                                 const OperatorConfig& cfg) {
    OperatorConfig merged = cfg;
    merged.params = defaults;
    merged.params.update(cfg.params);
    return base_factory(base_desc, merged);
  });
}

ExtensionLoader::ExtensionLoader(OperatorRegistry& operators, TemplateRegistry& templates)
    : operators_(operators), templates_(templates) {}

void ExtensionLoader::scan(const std::vector<std::filesystem::path>& roots) {
  std::lock_guard lock(mu_);
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& root : roots) {
    std::error_code ec;
    if (fs::is_regular_file(root / kExtensionManifestFile, ec)) {
      files.push_back(root / kExtensionManifestFile);
      continue;
    }
    if (!fs::is_directory(root, ec)) continue;
    std::vector<fs::path> found;
    for (const auto& entry : fs::directory_iterator(root, ec)) {
      if (entry.is_directory() && fs::is_regular_file(entry.path() / kExtensionManifestFile)) {
        found.push_back(entry.path() / kExtensionManifestFile);
      }
    }
    std::sort(found.begin(), found.end());
    files.insert(files.end(), found.begin(), found.end());
  }
  for (const auto& file : files) {
    auto canonical = fs::weakly_canonical(file).parent_path();
    bool seen = std::any_of(manifests_.begin(), manifests_.end(), [&](const auto& m) {
      return fs::weakly_canonical(m.root) == canonical;
    });
    if (seen) continue;
    auto manifest = ExtensionManifest::load(file);
    for (const auto& op : manifest.operators) {
      auto [it, inserted] = owner_.emplace(op.descriptor.name, manifests_.size());
      if (!inserted) {
        throw Error(Errc::kDuplicateName, "operator '" + op.descriptor.name +
                                              "' is declared by extensions '" +
                                              manifests_[it->second].name + "' and '" +
                                              manifest.name + "'");
      }
    }
    manifests_.push_back(std::move(manifest));
  }
}

bool ExtensionLoader::load_for(std::string_view operator_name) {
  std::lock_guard lock(mu_);
  auto it = owner_.find(operator_name);
  if (it == owner_.end() || loaded_.count(it->second) || loading_.count(it->second)) {
    return false;
  }
  load(it->second);
  return true;
}

void ExtensionLoader::load_all() {
  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < manifests_.size(); ++i) {
    if (!loaded_.count(i) && !loading_.count(i)) load(i);
  }
}

void ExtensionLoader::attach() {
  operators_.set_miss_handler([this](std::string_view name) { load_for(name); });
}

std::vector<std::string> ExtensionLoader::loaded() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (auto i : loaded_) out.push_back(manifests_[i].name);
  return out;
}

void ExtensionLoader::load(std::size_t index) {
  const auto& m = manifests_[index];
  loading_.insert(index);
  try {
    for (const auto& t : m.templates) {
      templates_.add(PromptTemplate::from_json(read_json(m.root / t)));
    }
    for (const auto& op : m.operators) {
      if (operators_.find(op.descriptor.name) == nullptr) {
        register_extension_operator(operators_, op);
      }
    }
  } catch (const Error& e) {
    loading_.erase(index);
    throw Error(e.code(), "extension '" + m.name + "': " + e.what());
  }
  loading_.erase(index);
  loaded_.insert(index);
}

}  // namespace dataprep
