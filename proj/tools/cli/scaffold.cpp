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

#include "scaffold.hpp"

#include <fstream>

#include "dataprep/errors.hpp"
#include "dataprep/extension.hpp"
#include "dataprep/value.hpp"

namespace dataprep::cli {
namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  out << text;
}

std::string pretty(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::optional<ScaffoldKind> parse_scaffold_kind(std::string_view name) {
  if (name == "operator") return ScaffoldKind::kOperator;
  if (name == "prompt-template") return ScaffoldKind::kPromptTemplate;
  if (name == "pipeline") return ScaffoldKind::kPipeline;
  if (name == "full-repository") return ScaffoldKind::kFullRepository;
  return std::nullopt;
}

std::string camel_case(std::string_view snake) {
  std::string out;
  bool upper = true;
  for (char c : snake) {
    if (c == '_') {
      upper = true;
      continue;
    }
    out.push_back(upper && c >= 'a' && c <= 'z' ? static_cast<char>(c - 'a' + 'A') : c);
    upper = false;
  }
  return out;
}

std::vector<fs::path> scaffold(const ScaffoldSpec& spec) {
  if (!valid_extension_name(spec.name)) {
    throw Error(Errc::kInvalidArgument,
                "invalid extension name '" + spec.name +
                    "': use lowercase letters, digits and underscores, starting with a letter");
  }
  std::error_code ec;
  if (fs::exists(spec.target, ec) && !fs::is_empty(spec.target, ec)) {
    throw Error(Errc::kInvalidArgument, "target directory " + spec.target.string() +
                                            " is not empty");
  }
  const bool full = spec.kinds.count(ScaffoldKind::kFullRepository) != 0;
  const bool want_op = full || spec.kinds.count(ScaffoldKind::kOperator);
  const bool want_tmpl = full || spec.kinds.count(ScaffoldKind::kPromptTemplate);
  const bool want_pipe = full || spec.kinds.count(ScaffoldKind::kPipeline);

  const std::string op_name = camel_case(spec.name) + "Refiner";
  const std::string tmpl_id = spec.name + "_prompt";
  std::vector<fs::path> created;
  auto emit = [&](const fs::path& rel, const std::string& text) {
    write_file(spec.target / rel, text);
    created.push_back(rel);
  };

  Json manifest = {{"name", spec.name}, {"version", "0.1.0"},
                   {"operators", Json::array()}, {"templates", Json::array()},
                   {"pipelines", Json::array()}};

  // The pipeline and law tests use the stub operator when there is one and a
  // shipped refiner otherwise.
  const std::string pipeline_op = want_op ? op_name : "UrlRefiner";
  const Json bindings = {{"input_key", {"text"}}, {"output_key", {"text"}}};

  if (want_op) {
    Json stub = {
        {"base", "identity"},
        {"descriptor",
         {{"name", op_name},
          {"category", "refine"},
          {"modality", "text"},
          {"tier", "domain"},
          {"description", "Placeholder refiner. Replace the category and base to give it behavior."},
          {"input_roles", {{{"name", "input_key"}, {"kind", "text"}}}},
          {"output_roles", {{{"name", "output_key"}, {"kind", "text"}, {"in_place", true}}}}}}};
    const fs::path rel = fs::path("operators") / (op_name + ".json");
    emit(rel, pretty(stub));
    manifest["operators"].push_back(rel.generic_string());
  }
  if (want_tmpl) {
    Json t = {{"identifier", tmpl_id},
              {"description", "Starter template for " + spec.name + "."},
              {"slots", {{{"name", "text"}, {"required", true}}}},
              {"body", {"Rewrite the following text.", "", "{text}"}}};
    const fs::path rel = fs::path("templates") / (tmpl_id + ".json");
    emit(rel, pretty(t));
    manifest["templates"].push_back(rel.generic_string());
  }
  if (want_pipe) {
    Json p = {{"initial_columns", {{{"name", "text"}, {"kind", "text"}}}},
              {"storage", {{"inline", {{{"text", "see https://example.org for details"}},
                                       {{"text", "plain row"}}}}}},
              {"operators", {{{"name", pipeline_op}, {"bindings", bindings}}}},
              {"extension_paths", {".."}}};
    const fs::path rel = fs::path("pipelines") / (spec.name + ".pipeline.json");
    emit(rel, pretty(p));
    manifest["pipelines"].push_back(rel.generic_string());
  }
  if (want_op) {
    Json laws = {{"cases",
                  {{{"operator", op_name},
                    {"bindings", bindings},
                    {"rows", {{{"text", "hello"}}, {{"text", ""}}, {{"text", "\xF0\x9F\x98\x80 x"}}}}}}}};
    emit(fs::path("tests") / "category_law.json", pretty(laws));
  }
  if (full) {
    emit("README.md", "# " + spec.name + "\n\n"
                      "Extension package. Put this directory (or its parent) on\n"
                      "`DATAFLOW_EXT_PATH` to make its operators and templates available.\n\n"
                      "    dataprep compile pipelines/" + spec.name + ".pipeline.json\n"
                      "    dataprep check .\n");
  }
  emit(kExtensionManifestFile, pretty(manifest));
  return created;
}

}  // namespace dataprep::cli
