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

#ifndef DATAPREP_LIBRARY_HPP_
#define DATAPREP_LIBRARY_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dataprep/operator.hpp"

namespace dataprep {

/// UrlRefiner, CodepointClassRefiner, ExactDedupFilter, LengthSampleEvaluator,
/// ScoreThresholdFilter, TextStatsDatasetEvaluator, AnswerGenerator and
/// VariantRowGenerator, plus QualityScoreSampleEvaluator.
void register_core_operators(OperatorRegistry& registry);

/// Removes every `http://` or `https://` URL, taken to run up to the next
/// whitespace character. Everything else is left byte-identical.
std::string remove_urls(std::string_view text);

struct CodepointRange {
  char32_t first;
  char32_t last;
};

/// Emoji blocks: pictographs, emoticons, transport, dingbats, regional
/// indicators and the emoji variation selector.
const std::vector<CodepointRange>& emoji_ranges();

std::string remove_codepoints(std::string_view text, const std::vector<CodepointRange>& ranges);

struct ScoreThresholdConfig {
  double minimum = 0.0;
  std::optional<double> maximum;
  bool keep_on_equal = true;

  /// Throws kInvalidConfig when maximum < minimum.
  void validate() const;
  bool keeps(double score) const;
};

/// Failure rate above which an LLM field generator fails its node.
inline constexpr double kDefaultMaxFailureRate = 0.1;

}  // namespace dataprep

#endif  // DATAPREP_LIBRARY_HPP_
