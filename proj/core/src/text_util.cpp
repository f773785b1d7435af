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

#include "dataprep/text_util.hpp"

#include <cctype>

namespace dataprep {

std::string_view trim(std::string_view text) {
  const auto b = text.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = text.find_last_not_of(" \t\r\n");
  return text.substr(b, e - b + 1);
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::size_t utf8_decode(std::string_view text, std::size_t pos, char32_t& cp) {
  const auto c = static_cast<unsigned char>(text[pos]);
  std::size_t len = 1;
  char32_t value = c;
  if (c >= 0xF0 && c <= 0xF4) {
    len = 4;
    value = c & 0x07;
  } else if (c >= 0xE0 && c <= 0xEF) {
    len = 3;
    value = c & 0x0F;
  } else if (c >= 0xC2 && c <= 0xDF) {
    len = 2;
    value = c & 0x1F;
  }
  if (len > 1) {
    if (pos + len > text.size()) {
      cp = c;
      return 1;
    }
    for (std::size_t k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(text[pos + k]);
      if ((b & 0xC0) != 0x80) {
        cp = c;
        return 1;
      }
      value = (value << 6) | (b & 0x3F);
    }
  }
  cp = value;
  return len;
}

std::size_t utf8_length(std::string_view text) {
  std::size_t count = 0;
  char32_t cp;
  for (std::size_t i = 0; i < text.size(); i += utf8_decode(text, i, cp)) ++count;
  return count;
}

std::vector<FencedBlock> fenced_blocks(std::string_view text) {
  std::vector<FencedBlock> out;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    auto line_end = text.find('\n', open + 3);
    if (line_end == std::string_view::npos) line_end = text.size();
    FencedBlock block;
    block.tag = to_lower(trim(text.substr(open + 3, line_end - open - 3)));
    const std::size_t body_start = std::min(line_end + 1, text.size());
    const auto close = text.find("```", body_start);
    const std::size_t body_end = close == std::string_view::npos ? text.size() : close;
    block.body = std::string(trim(text.substr(body_start, body_end - body_start)));
    out.push_back(std::move(block));
    if (close == std::string_view::npos) break;
    pos = close + 3;
  }
  return out;
}

}  // namespace dataprep
