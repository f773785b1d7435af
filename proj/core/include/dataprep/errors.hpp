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

#ifndef DATAPREP_ERRORS_HPP_
#define DATAPREP_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dataprep {

enum class Errc {
  kIo,
  kMalformed,
  kUnsupportedFormat,
  kMissingColumn,
  kLengthMismatch,
  kConcurrentWriter,
  kPersistence,
  kMissingSnapshot,
  kDigestMismatch,
  kInvalidConfig,
  kMissingCredential,
  kParse,
  kConformance,
  kBatchAborted,
  kDuplicateName,
  kNamingViolation,
  kInvalidDescriptor,
  kBindingIncomplete,
  kKindMismatch,
  kServingMismatch,
  kOperatorFailure,
  kCategoryLaw,
  kMissingSlot,
  kUnknownSlot,
  kInvalidTemplate,
  kIncompatibleTemplate,
  kUnknownTemplate,
  kUnknownOperator,
  kPlanDigestMismatch,
  kConnection,
  kInvalidArgument,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library. The code is stable; the message is
/// for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

class MissingColumnError : public Error {
 public:
  MissingColumnError(std::string column, std::vector<std::string> available);

  const std::string& column() const noexcept { return column_; }
  const std::vector<std::string>& available() const noexcept {
    return available_;
  }

 private:
  std::string column_;
  std::vector<std::string> available_;
};

}  // namespace dataprep

#endif  // DATAPREP_ERRORS_HPP_
