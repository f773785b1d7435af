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

// Helpers shared by the shipped operators. Not installed.
#ifndef DATAPREP_SRC_OP_SUPPORT_HPP_
#define DATAPREP_SRC_OP_SUPPORT_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dataprep/operator.hpp"
#include "dataprep/prompt.hpp"

namespace dataprep::detail {

/// The template an LLM operator was configured with. Falls back to the first
/// allowed template when the config names none.
std::shared_ptr<const PromptTemplate> configured_template(const OperatorDescriptor& d,
                                                          const OperatorConfig& cfg);

/// Text cells of `column`; null cells come back as nullopt. A non-text,
/// non-null cell throws kKindMismatch naming its row.
std::vector<std::optional<std::string>> text_cells(const Dataset& data,
                                                   const std::string& column);

/// Sends one request per prompt and returns the reply text, nullopt for
/// failures. Failures are added to the context's count.
std::vector<std::optional<std::string>> generate_all(RunContext& ctx,
                                                     const std::vector<std::string>& prompts);

/// Adds `column` as all-null when it does not exist yet, so producers create
/// their declared columns even when they end up writing no values.
void ensure_column(StorageSession& session, const std::string& column);

FieldValue text_or_null(const std::optional<std::string>& value);

}  // namespace dataprep::detail

#endif  // DATAPREP_SRC_OP_SUPPORT_HPP_
