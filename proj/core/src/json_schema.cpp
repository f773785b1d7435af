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

#include "dataprep/json_schema.hpp"

#include <algorithm>

#include "dataprep/text_util.hpp"

namespace dataprep {
namespace {

bool type_matches(const Json& value, std::string_view type) {
  if (type == "string") return value.is_string();
  if (type == "number") return value.is_number();
  if (type == "integer") {
    if (value.is_number_integer()) return true;
    if (!value.is_number_float()) return false;
    const double d = value.get<double>();
    return d == static_cast<double>(static_cast<long long>(d));
  }
  if (type == "boolean") return value.is_boolean();
  if (type == "array") return value.is_array();
  if (type == "object") return value.is_object();
  if (type == "null") return value.is_null();
  return false;
}

std::string child_path(const std::string& parent, const std::string& key) {
  return (parent == "." ? "." : parent + ".") + key;
}

void validate_at(const Json& value, const Json& schema, const std::string& path) {
  if (!schema.is_object()) return;

  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_string()) {
      ok = type_matches(value, it->get_ref<const std::string&>());
    } else if (it->is_array()) {
      ok = std::any_of(it->begin(), it->end(), [&](const Json& t) {
        return t.is_string() && type_matches(value, t.get_ref<const std::string&>());
      });
    }
    if (!ok) throw ConformanceError("type", path, "expected type " + it->dump());
  }

  if (auto it = schema.find("enum"); it != schema.end() && it->is_array()) {
    if (std::find(it->begin(), it->end(), value) == it->end()) {
      throw ConformanceError("enum", path, "value " + value.dump() + " not in " + it->dump());
    }
  }

  if (value.is_object()) {
    if (auto it = schema.find("required"); it != schema.end() && it->is_array()) {
      for (const auto& name : *it) {
        if (!name.is_string()) continue;
        const auto& key = name.get_ref<const std::string&>();
        if (!value.contains(key)) {
          throw ConformanceError("required", child_path(path, key),
                                 "missing required property '" + key + "'");
        }
      }
    }
    if (auto it = schema.find("properties"); it != schema.end() && it->is_object()) {
      for (const auto& [key, sub] : it->items()) {
        if (auto v = value.find(key); v != value.end()) {
          validate_at(*v, sub, child_path(path, key));
        }
      }
    }
  }

  if (value.is_array()) {
    if (auto it = schema.find("items"); it != schema.end() && it->is_object()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        validate_at(value[i], *it, (path == "." ? "" : path) + "[" + std::to_string(i) + "]");
      }
    }
  }
}

}  // namespace

ConformanceError::ConformanceError(std::string keyword, std::string path,
                                   const std::string& detail)
    : Error(Errc::kConformance,
            "schema violation at '" + path + "' (keyword '" + keyword + "'): " + detail),
      keyword_(std::move(keyword)),
      path_(std::move(path)) {}

void validate_schema(const Json& value, const Json& schema) { validate_at(value, schema, "."); }

Json validate_structured_output(std::string_view text, const Json& schema) {
  std::string_view body = trim(text);
  if (body.starts_with("```")) {
    const auto nl = body.find('\n');
    const auto close = body.rfind("```");
    if (nl != std::string_view::npos && close != std::string_view::npos && close > nl) {
      body = trim(body.substr(nl + 1, close - nl - 1));
    }
  }
  Json parsed = Json::parse(body, nullptr, false);
  if (parsed.is_discarded()) {
    throw Error(Errc::kParse, "structured output is not valid JSON");
  }
  validate_schema(parsed, schema);
  return parsed;
}

}  // namespace dataprep
