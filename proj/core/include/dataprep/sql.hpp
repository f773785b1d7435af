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

#ifndef DATAPREP_SQL_HPP_
#define DATAPREP_SQL_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dataprep::sql {

enum class GenComplexity { kSimple, kModerate, kComplex, kHighlyComplex };
enum class ComponentDifficulty { kSimple, kModerate, kHard, kExtraHard };

enum class AugmentationStrategy {
  kDataValueTransformation,
  kQueryStructureModification,
  kBusinessLogicAlteration,
  kComplexityEnhancement,
  kAdvancedFeatureIntroduction,
  kPerformanceAndOptimization,
};

enum class StyleAxis { kTone, kIntent, kDensity, kInteraction };

enum class QuestionStyle {
  kFormal,
  kColloquial,
  kImperative,
  kInterrogative,
  kDeclarative,
  kConcise,
  kDescriptive,
  kAmbiguous,
  kMetaphorical,
  kRolePlaying,
  kProcedural,
};

inline constexpr std::array<GenComplexity, 4> kGenComplexities = {
    GenComplexity::kSimple, GenComplexity::kModerate, GenComplexity::kComplex,
    GenComplexity::kHighlyComplex};

inline constexpr std::array<AugmentationStrategy, 6> kAugmentationStrategies = {
    AugmentationStrategy::kDataValueTransformation,
    AugmentationStrategy::kQueryStructureModification,
    AugmentationStrategy::kBusinessLogicAlteration,
    AugmentationStrategy::kComplexityEnhancement,
    AugmentationStrategy::kAdvancedFeatureIntroduction,
    AugmentationStrategy::kPerformanceAndOptimization};

inline constexpr std::array<QuestionStyle, 11> kQuestionStyles = {
    QuestionStyle::kFormal,      QuestionStyle::kColloquial,    QuestionStyle::kImperative,
    QuestionStyle::kInterrogative, QuestionStyle::kDeclarative, QuestionStyle::kConcise,
    QuestionStyle::kDescriptive, QuestionStyle::kAmbiguous,     QuestionStyle::kMetaphorical,
    QuestionStyle::kRolePlaying, QuestionStyle::kProcedural};

std::string_view to_string(GenComplexity c);        // "simple" ... "highly complex"
std::string_view to_string(ComponentDifficulty d);  // "simple" ... "extra hard"
std::string_view to_string(AugmentationStrategy s); // snake_case
std::string_view to_string(QuestionStyle s);        // snake_case
std::string_view to_string(StyleAxis a);
StyleAxis axis_of(QuestionStyle s);

std::optional<ComponentDifficulty> parse_component_difficulty(std::string_view name);

/// Prompt guidance for each generation complexity level.
std::string_view complexity_definition(GenComplexity c);
/// The fixed list of advanced SQL functions offered as generation hints.
const std::vector<std::string>& advanced_function_hints();

/// Syntactic features counted by the tolerant scanner.
struct SqlFeatures {
  std::size_t select_columns = 0;     // items in the outermost select list
  std::size_t aggregates = 0;         // COUNT/SUM/AVG/MIN/MAX calls anywhere
  bool group_by = false;
  bool order_by = false;              // ORDER BY outside window specifications
  std::size_t set_operators = 0;      // UNION [ALL], INTERSECT, EXCEPT
  std::size_t nested_subqueries = 0;  // '(' immediately followed by SELECT or WITH
  std::size_t joins = 0;
};

/// Scans a SELECT (or WITH ... SELECT) statement. Returns nullopt for text
/// that is not one: empty input, unbalanced parentheses or quotes, or a
/// statement that does not start with SELECT/WITH.
std::optional<SqlFeatures> scan(std::string_view sql);

/// The component-difficulty rule table. score = aggregates + group_by +
/// order_by + 2*set_operators + 2*nested_subqueries + max(0, joins - 1) +
/// (select_columns > 3); 0 simple, 1-2 moderate, 3-4 hard, 5+ extra hard.
struct ComponentRules {
  int moderate_from = 1;
  int hard_from = 3;
  int extra_hard_from = 5;

  static int score(const SqlFeatures& f);
  ComponentDifficulty classify(const SqlFeatures& f) const;
};

/// Bands over n/k: >= simple_from simple, >= moderate_from moderate, > 0
/// hard, 0 extra hard.
struct ExecutionThresholds {
  double simple_from = 0.8;
  double moderate_from = 0.5;

  ComponentDifficulty classify(int n, int k) const;
};

struct ExecTrialResult {
  int k = 0;
  int n = 0;
  double ratio() const { return k == 0 ? 0.0 : static_cast<double>(n) / k; }
};

/// SQL from a model reply: the last ```sql block, else the last fenced block,
/// else the suffix starting at the first SELECT or WITH keyword. Trimmed.
std::optional<std::string> extract_sql(std::string_view reply);

}  // namespace dataprep::sql

#endif  // DATAPREP_SQL_HPP_
