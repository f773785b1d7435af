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

#ifndef DATAPREP_TOOLS_CLI_CLI_HPP_
#define DATAPREP_TOOLS_CLI_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace dataprep::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;    // usage, I/O, unreadable input
inline constexpr int kExitCompile = 2;  // compile diagnostics
inline constexpr int kExitRuntime = 3;  // a node or law check failed

/// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dataprep::cli

#endif  // DATAPREP_TOOLS_CLI_CLI_HPP_
