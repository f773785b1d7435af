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

#ifndef DATAPREP_JSON_SCHEMA_HPP_
#define DATAPREP_JSON_SCHEMA_HPP_

#include <string>
#include <string_view>

#include "dataprep/errors.hpp"
#include "dataprep/value.hpp"

namespace dataprep {

/// A structured output failed its schema. `keyword` is the violated schema
/// keyword and `path` locates the offending value (".sql", ".items[2]").
class ConformanceError : public Error {
 public:
  ConformanceError(std::string keyword, std::string path, const std::string& detail);

  const std::string& keyword() const noexcept { return keyword_; }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string keyword_;
  std::string path_;
};

/// Checks `value` against the supported schema subset: type, properties,
/// required, items, enum. Throws ConformanceError on the first violation.
void validate_schema(const Json& value, const Json& schema);

/// Parses `text` as JSON (a surrounding ```json fence is tolerated) and
/// validates it. Throws Error(kParse) or ConformanceError.
Json validate_structured_output(std::string_view text, const Json& schema);

}  // namespace dataprep

#endif  // DATAPREP_JSON_SCHEMA_HPP_
