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

#ifndef DATAPREP_TOOLS_CLI_SCAFFOLD_HPP_
#define DATAPREP_TOOLS_CLI_SCAFFOLD_HPP_

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dataprep::cli {

enum class ScaffoldKind { kOperator, kPromptTemplate, kPipeline, kFullRepository };

struct ScaffoldSpec {
  std::string name;
  std::set<ScaffoldKind> kinds;
  std::filesystem::path target;
};

std::optional<ScaffoldKind> parse_scaffold_kind(std::string_view name);

/// "my_ext" -> "MyExt".
std::string camel_case(std::string_view snake);

/// Writes the extension layout and returns the created files, relative to
/// the target. Throws Error(kInvalidArgument) for a bad name or a non-empty
/// target.
std::vector<std::filesystem::path> scaffold(const ScaffoldSpec& spec);

}  // namespace dataprep::cli

#endif  // DATAPREP_TOOLS_CLI_SCAFFOLD_HPP_
