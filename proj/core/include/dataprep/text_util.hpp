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

#ifndef DATAPREP_TEXT_UTIL_HPP_
#define DATAPREP_TEXT_UTIL_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dataprep {

std::string_view trim(std::string_view text);
std::string to_lower(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Number of Unicode scalar values in UTF-8 `text`. Invalid bytes count as
/// one scalar each.
std::size_t utf8_length(std::string_view text);

/// Decodes the scalar starting at byte `pos` into `cp` and returns its byte
/// length. An invalid byte decodes as itself with length 1.
std::size_t utf8_decode(std::string_view text, std::size_t pos, char32_t& cp);

struct FencedBlock {
  std::string tag;  // info string after the opening fence, lowercased
  std::string body;
};

/// Every ``` fenced block in order of appearance. An unclosed trailing fence
/// runs to the end of the text.
std::vector<FencedBlock> fenced_blocks(std::string_view text);

}  // namespace dataprep

#endif  // DATAPREP_TEXT_UTIL_HPP_
