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

// Everything a pipeline needs at run time, assembled from its definition: the
// operator and template registries (with extensions), the input dataset, the
// serving client and named resources.
#ifndef DATAPREP_CATALOG_HPP_
#define DATAPREP_CATALOG_HPP_

#include <memory>
#include <string>
#include <vector>

#include "dataprep/extension.hpp"
#include "dataprep/operator.hpp"
#include "dataprep/pipeline.hpp"
#include "dataprep/prompt.hpp"
#include "dataprep/serving.hpp"

namespace dataprep {

class Catalog {
 public:
  /// Shipped operators and templates. Extensions on `extension_paths` and
  /// DATAFLOW_EXT_PATH are indexed now and loaded on first reference.
  explicit Catalog(const std::vector<std::string>& extension_paths = {});
  Catalog(const Catalog&) = delete;
  Catalog& operator=(const Catalog&) = delete;

  OperatorRegistry& operators() { return operators_; }
  TemplateRegistry& templates() { return templates_; }
  ExtensionLoader& extensions() { return extensions_; }

  CompileResult compile(const PipelineDef& def) { return dataprep::compile(def, operators_, templates_); }

 private:
  OperatorRegistry operators_;
  TemplateRegistry templates_;
  ExtensionLoader extensions_;
};

/// The definition's input rows: the inline rows or the storage file, with
/// declared initial columns that are absent added as nulls.
Dataset load_input(const PipelineDef& def);

struct Runtime {
  std::shared_ptr<ServingClient> serving;  // null when the definition has none
  ResourceSet resources;
};

/// `backend` replaces the backend implied by the serving config (tests use
/// it to inject scripted latency).
Runtime open_runtime(const PipelineDef& def, std::shared_ptr<Backend> backend = nullptr);

}  // namespace dataprep

#endif  // DATAPREP_CATALOG_HPP_
