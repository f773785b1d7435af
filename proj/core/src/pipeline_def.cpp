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

#include <fstream>
#include <sstream>

#include "dataprep/pipeline.hpp"

namespace dataprep {
namespace {

Error malformed(const std::string& msg) {
  return Error(Errc::kMalformed, "pipeline definition: " + msg);
}

}  // namespace

PipelineDef PipelineDef::from_json(const Json& json, const std::filesystem::path& base_dir) {
  if (!json.is_object()) throw malformed("top level must be an object");
  PipelineDef def;
  def.base_dir = base_dir;
  try {
    if (json.contains("initial_columns")) {
      def.has_initial_columns = true;
      for (const auto& c : json["initial_columns"]) {
        InitialColumn col;
        if (c.is_string()) {
          col.name = c.get<std::string>();
        } else {
          col.name = c.at("name").get<std::string>();
          auto kind = c.value("kind", std::string("any"));
          if (kind != "any") {
            col.kind = parse_kind(kind);
            if (!col.kind) throw malformed("unknown kind '" + kind + "'");
          }
        }
        def.initial_columns.push_back(std::move(col));
      }
    }
    const auto& ops = json.at("operators");
    if (!ops.is_array()) throw malformed("'operators' must be an array");
    for (const auto& o : ops) {
      NodeDef node;
      node.operator_name = o.at("name").get<std::string>();
      node.config = o.value("config", Json::object());
      if (!node.config.is_object()) throw malformed("config of '" + node.operator_name + "' must be an object");
      node.bindings = binding_from_json(o.value("bindings", Json::object()));
      node.depends_on = o.value("depends_on", std::vector<std::size_t>{});
      def.operators.push_back(std::move(node));
    }
    if (json.contains("serving") && !json["serving"].is_null()) {
      def.serving = backend_config_from_json(json["serving"]);
    }
    if (json.contains("storage")) {
      const auto& s = json["storage"];
      if (s.contains("inline")) {
        if (!s["inline"].is_array()) throw malformed("'storage.inline' must be an array of rows");
        def.storage.inline_rows = s["inline"];
      }
      if (s.contains("location")) def.storage.location = s["location"].get<std::string>();
      if (s.contains("format")) {
        auto f = parse_format(s["format"].get<std::string>());
        if (!f) throw Error(Errc::kUnsupportedFormat, "unsupported storage format");
        def.storage.format = *f;
      }
    }
    def.resources = json.value("resources", Json::object());
    def.required_output_columns =
        json.value("required_output_columns", std::vector<std::string>{});
    auto policy = json.value("category_law_policy", std::string("fail"));
    if (policy == "fail") {
      def.category_law_policy = LawPolicy::kFail;
    } else if (policy == "warn") {
      def.category_law_policy = LawPolicy::kWarn;
    } else {
      throw malformed("category_law_policy must be 'fail' or 'warn'");
    }
    def.extension_paths = json.value("extension_paths", std::vector<std::string>{});
  } catch (const Json::exception& e) {
    throw malformed(e.what());
  }
  if (def.operators.empty()) throw malformed("no operators");
  return def;
}

PipelineDef PipelineDef::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Json json;
  try {
    json = Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw Error(Errc::kMalformed, path.string() + ": " + e.what());
  }
  auto base = path.parent_path();
  return from_json(json, base.empty() ? std::filesystem::path(".") : base);
}

Json PipelineDef::to_json() const {
  Json j = Json::object();
  if (has_initial_columns) {
    Json cols = Json::array();
    for (const auto& c : initial_columns) {
      cols.push_back({{"name", c.name},
                      {"kind", c.kind ? std::string(to_string(*c.kind)) : "any"}});
    }
    j["initial_columns"] = std::move(cols);
  }
  Json ops = Json::array();
  for (const auto& n : operators) {
    Json o = {{"name", n.operator_name},
              {"config", n.config},
              {"bindings", dataprep::to_json(n.bindings)}};
    if (!n.depends_on.empty()) o["depends_on"] = n.depends_on;
    ops.push_back(std::move(o));
  }
  j["operators"] = std::move(ops);
  if (serving) j["serving"] = dataprep::to_json(*serving);
  Json s = Json::object();
  if (storage.inline_rows) s["inline"] = *storage.inline_rows;
  if (storage.location) s["location"] = storage.location->generic_string();
  s["format"] = std::string(to_string(storage.format));
  j["storage"] = std::move(s);
  if (!resources.empty()) j["resources"] = resources;
  if (!required_output_columns.empty()) j["required_output_columns"] = required_output_columns;
  j["category_law_policy"] = category_law_policy == LawPolicy::kFail ? "fail" : "warn";
  if (!extension_paths.empty()) j["extension_paths"] = extension_paths;
  return j;
}

std::filesystem::path PipelineDef::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

}  // namespace dataprep
