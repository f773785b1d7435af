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

#include <gtest/gtest.h>

#include <set>

#include "dataprep/sql.hpp"
#include "testing.hpp"

namespace dataprep::sql {
namespace {

using dataprep::Json;

TEST(Scan, Features) {
  auto f = scan("SELECT a, b, COUNT(*) FROM t JOIN u ON t.x = u.x JOIN v ON 1 = 1 "
                "WHERE a IN (SELECT a FROM w) GROUP BY a, b ORDER BY b");
  ASSERT_TRUE(f);
  EXPECT_EQ(f->select_columns, 3u);
  EXPECT_EQ(f->aggregates, 1u);
  EXPECT_TRUE(f->group_by);
  EXPECT_TRUE(f->order_by);
  EXPECT_EQ(f->joins, 2u);
  EXPECT_EQ(f->nested_subqueries, 1u);
  EXPECT_EQ(f->set_operators, 0u);
}

TEST(Scan, IgnoresLiteralsAndWindowOrdering) {
  auto f = scan("SELECT 'union select (select' AS x, ROW_NUMBER() OVER (ORDER BY a) FROM t");
  ASSERT_TRUE(f);
  EXPECT_EQ(f->set_operators, 0u);
  EXPECT_EQ(f->nested_subqueries, 0u);
  EXPECT_FALSE(f->order_by);
  EXPECT_EQ(f->select_columns, 2u);
}

TEST(Scan, RejectsNonQueries) {
  EXPECT_FALSE(scan(""));
  EXPECT_FALSE(scan("DELETE FROM t"));
  EXPECT_FALSE(scan("SELECT (a FROM t"));
  EXPECT_FALSE(scan("SELECT 'open FROM t"));
  EXPECT_TRUE(scan("  with c AS (SELECT 1) SELECT * FROM c"));
}

TEST(Component, SpecifiedExamples) {
  ComponentRules rules;
  auto label = [&](const char* q) { return std::string(to_string(rules.classify(*scan(q)))); };
  EXPECT_EQ(label("SELECT name FROM singer"), "simple");
  EXPECT_EQ(label("SELECT country, COUNT(*) FROM singer GROUP BY country"), "moderate");
  EXPECT_EQ(label("SELECT name FROM singer WHERE id IN (SELECT sid FROM show GROUP BY sid HAVING "
                  "COUNT(*) > 2) ORDER BY name"),
            "extra hard");
}

TEST(Component, HandLabelledSuite) {
  auto suite = Json::parse(testing::read_file(testing::source_path("tests/data/component_suite.json")));
  ASSERT_EQ(suite.size(), 12u);
  ComponentRules rules;
  for (const auto& c : suite) {
    auto f = scan(c["sql"].get<std::string>());
    ASSERT_TRUE(f) << c["sql"];
    EXPECT_EQ(to_string(rules.classify(*f)), c["label"].get<std::string>()) << c["sql"];
  }
}

TEST(Component, Bands) {
  ComponentRules rules;
  SqlFeatures f;
  EXPECT_EQ(rules.classify(f), ComponentDifficulty::kSimple);
  f.aggregates = 2;
  EXPECT_EQ(rules.classify(f), ComponentDifficulty::kModerate);
  f.aggregates = 4;
  EXPECT_EQ(rules.classify(f), ComponentDifficulty::kHard);
  f.aggregates = 5;
  EXPECT_EQ(rules.classify(f), ComponentDifficulty::kExtraHard);
}

TEST(Execution, ThresholdTable) {
  ExecutionThresholds th;
  EXPECT_EQ(th.classify(8, 8), ComponentDifficulty::kSimple);
  EXPECT_EQ(th.classify(5, 8), ComponentDifficulty::kModerate);
  EXPECT_EQ(th.classify(3, 8), ComponentDifficulty::kHard);
  EXPECT_EQ(th.classify(0, 8), ComponentDifficulty::kExtraHard);
  EXPECT_EQ(th.classify(4, 5), ComponentDifficulty::kSimple);
  EXPECT_EQ(th.classify(4, 8), ComponentDifficulty::kModerate);
  EXPECT_EQ(th.classify(1, 8), ComponentDifficulty::kHard);
  EXPECT_DOUBLE_EQ((ExecTrialResult{8, 3}).ratio(), 0.375);
}

TEST(Extract, Rules) {
  EXPECT_EQ(extract_sql("```sql\nSELECT name FROM singer\n```"), "SELECT name FROM singer");
  EXPECT_EQ(extract_sql("a\n```sql\nSELECT 1\n```\nthen\n```sql\nSELECT 2\n```"), "SELECT 2");
  EXPECT_EQ(extract_sql("```\nSELECT 3\n```"), "SELECT 3");
  EXPECT_EQ(extract_sql("The answer is SELECT 4 FROM t"), "SELECT 4 FROM t");
  EXPECT_FALSE(extract_sql("no query here"));
  EXPECT_FALSE(extract_sql("I cannot help with that."));
  EXPECT_EQ(extract_sql("Use WITH t AS (SELECT 1) SELECT * FROM t"), "WITH t AS (SELECT 1) SELECT * FROM t");
  EXPECT_FALSE(extract_sql(""));
}

TEST(Taxonomy, StylesAndAxes) {
  std::set<std::string> names;
  for (auto s : kQuestionStyles) names.insert(std::string(to_string(s)));
  EXPECT_EQ(names.size(), 11u);
  EXPECT_EQ(axis_of(QuestionStyle::kFormal), StyleAxis::kTone);
  EXPECT_EQ(axis_of(QuestionStyle::kColloquial), StyleAxis::kTone);
  EXPECT_EQ(axis_of(QuestionStyle::kImperative), StyleAxis::kIntent);
  EXPECT_EQ(axis_of(QuestionStyle::kDeclarative), StyleAxis::kIntent);
  EXPECT_EQ(axis_of(QuestionStyle::kMetaphorical), StyleAxis::kDensity);
  EXPECT_EQ(axis_of(QuestionStyle::kRolePlaying), StyleAxis::kInteraction);
  EXPECT_EQ(axis_of(QuestionStyle::kProcedural), StyleAxis::kInteraction);
  EXPECT_EQ(kAugmentationStrategies.size(), 6u);
  EXPECT_EQ(to_string(GenComplexity::kHighlyComplex), "highly complex");
  EXPECT_EQ(to_string(ComponentDifficulty::kExtraHard), "extra hard");
  EXPECT_EQ(parse_component_difficulty("extra hard"), ComponentDifficulty::kExtraHard);
  EXPECT_EQ(advanced_function_hints().size(), 12u);
  for (auto c : kGenComplexities) EXPECT_FALSE(complexity_definition(c).empty());
}

}  // namespace
}  // namespace dataprep::sql
