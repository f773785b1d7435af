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

// Declarative extension packages. An extension is a directory holding an
// extension.json manifest plus template and pipeline files. Operators in an
// extension either run placeholder identity behavior or preset an existing
// operator; no code is loaded from disk.
#ifndef DATAPREP_EXTENSION_HPP_
#define DATAPREP_EXTENSION_HPP_

#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dataprep/operator.hpp"
#include "dataprep/prompt.hpp"

namespace dataprep {

inline constexpr const char* kExtensionPathEnv = "DATAFLOW_EXT_PATH";
inline constexpr const char* kExtensionManifestFile = "extension.json";

/// Lowercase letters, digits and underscores, starting with a letter.
bool valid_extension_name(std::string_view name);

struct ExtensionOperator {
  OperatorDescriptor descriptor;
  /// "identity", or the name of an operator whose behavior this one presets.
  std::string base = "identity";
  /// Parameters applied under the node's own config.
  Json defaults = Json::object();
};

struct ExtensionManifest {
  std::string name;
  std::string version = "0.1.0";
  std::filesystem::path root;
  std::vector<ExtensionOperator> operators;
  std::vector<std::filesystem::path> templates;  // relative to root
  std::vector<std::filesystem::path> pipelines;  // relative to root

  /// Throws kIo, kMalformed or kInvalidDescriptor.
  static ExtensionManifest load(const std::filesystem::path& manifest_file);
  Json to_json() const;
};

/// Directories to search: `extra` first, then the entries of
/// DATAFLOW_EXT_PATH (colon separated). Empty entries are skipped.
std::vector<std::filesystem::path> extension_search_path(
    const std::vector<std::string>& extra = {});

/// Registers one extension operator. Identity operators need a full
/// descriptor; preset operators inherit the base descriptor's roles.
void register_extension_operator(OperatorRegistry& registry, const ExtensionOperator& op);

/// Indexes manifests on a search path and registers an extension's operators
/// and templates the first time one of its operators is looked up.
class ExtensionLoader {
 public:
  ExtensionLoader(OperatorRegistry& operators, TemplateRegistry& templates);

  /// Each root is an extension directory or a directory of them. Reads only
  /// the manifests. Throws kDuplicateName when two extensions declare the
  /// same operator.
  void scan(const std::vector<std::filesystem::path>& roots);

  /// Loads the extension declaring `operator_name`, if any. Returns whether
  /// one was loaded by this call.
  bool load_for(std::string_view operator_name);
  void load_all();

  /// Installs load_for as the operator registry's miss handler.
  void attach();

  const std::vector<ExtensionManifest>& discovered() const { return manifests_; }
  std::vector<std::string> loaded() const;

 private:
  void load(std::size_t index);

  OperatorRegistry& operators_;
  TemplateRegistry& templates_;
  std::vector<ExtensionManifest> manifests_;
  std::map<std::string, std::size_t, std::less<>> owner_;
  std::set<std::size_t> loaded_;
  std::set<std::size_t> loading_;
  mutable std::recursive_mutex mu_;
};

}  // namespace dataprep

#endif  // DATAPREP_EXTENSION_HPP_
