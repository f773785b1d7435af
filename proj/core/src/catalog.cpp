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

#include "dataprep/catalog.hpp"

#include "dataprep/library.hpp"
#include "dataprep/text2sql.hpp"

namespace dataprep {

Catalog::Catalog(const std::vector<std::string>& extension_paths)
    : templates_(TemplateRegistry::with_builtins()), extensions_(operators_, templates_) {
  register_core_operators(operators_);
  register_text2sql_operators(operators_);
  extensions_.scan(extension_search_path(extension_paths));
  extensions_.attach();
}

Dataset load_input(const PipelineDef& def) {
  Dataset data;
  if (def.storage.inline_rows) {
    data = parse_json(def.storage.inline_rows->dump());
  } else if (def.storage.location) {
    data = load_dataset(def.resolve(*def.storage.location), def.storage.format);
  }
  for (const auto& col : def.initial_columns) data.add_column(col.name);
  return data;
}

Runtime open_runtime(const PipelineDef& def, std::shared_ptr<Backend> backend) {
  Runtime rt;
  if (def.serving) {
    rt.serving = std::make_shared<ServingClient>(*def.serving, std::move(backend));
  }
  if (def.resources.contains("database")) {
    rt.resources.put<DatabaseConnector>("database",
                                        open_database(def.resources["database"], def.base_dir));
  }
  return rt;
}

}  // namespace dataprep
