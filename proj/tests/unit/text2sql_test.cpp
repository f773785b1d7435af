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

#include <map>

#include "dataprep/catalog.hpp"
#include "dataprep/pipeline.hpp"
#include "dataprep/sql.hpp"
#include "dataprep/text2sql.hpp"
#include "testing.hpp"

namespace dataprep {
namespace {

using namespace std::chrono_literals;
using testing::rows;
using testing::TempDir;

const char* kSlowQuery =
    "WITH RECURSIVE c(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM c) SELECT COUNT(*) FROM c";

MockRule contains(std::string pattern, std::vector<std::string> replies, bool fail = false) {
  return {MatchMode::kContains, std::move(pattern), std::move(replies), fail};
}

TEST(Connector, ConstantQuery) {
  auto db = sample_database();
  auto out = db->execute_sql("SELECT 1", 1000ms);
  ASSERT_TRUE(out.ok());
  ASSERT_EQ(out.result->rows.size(), 1u);
  EXPECT_EQ(out.result->rows[0][0], 1);
}

TEST(Connector, FailureKinds) {
  auto db = sample_database();
  auto syntax = db->execute_sql("SELEC 1", 1000ms);
  EXPECT_EQ(syntax.failure, SqlFailure::kSyntax);
  auto runtime = db->execute_sql("SELECT title FROM album", 1000ms);
  EXPECT_EQ(runtime.failure, SqlFailure::kRuntime);
  auto slow = db->execute_sql(kSlowQuery, 10ms);
  EXPECT_EQ(slow.failure, SqlFailure::kTimeout);
  EXPECT_LT(slow.elapsed, 2s);
  // The connection stays usable after a cancelled statement.
  EXPECT_TRUE(db->execute_sql("SELECT COUNT(*) FROM singer", 1000ms).ok());
}

TEST(Connector, ReadOnly) {
  auto db = sample_database();
  auto before = db->execute_sql("SELECT COUNT(*) FROM singer", 1000ms);
  EXPECT_FALSE(db->execute_sql("DELETE FROM singer", 1000ms).ok());
  auto after = db->execute_sql("SELECT COUNT(*) FROM singer", 1000ms);
  EXPECT_EQ(before.result->rows, after.result->rows);
}

TEST(Connector, Schema) {
  auto schema = sample_database()->get_schema(3);
  ASSERT_EQ(schema.tables.size(), 3u);
  for (const auto& t : schema.tables) {
    EXPECT_NE(t.create_sql.find("CREATE TABLE"), std::string::npos);
    for (const auto& c : t.columns) EXPECT_LE(c.samples.size(), 3u);
  }
  EXPECT_EQ(schema.dialect, "sqlite");
  EXPECT_NE(schema.render().find("CREATE TABLE singer"), std::string::npos);

  EXPECT_TRUE(SqliteConnector::from_script("")->get_schema(3).tables.empty());
  auto one = SqliteConnector::from_script("CREATE TABLE t(a INTEGER); INSERT INTO t VALUES (1);")->get_schema(3);
  ASSERT_EQ(one.tables.size(), 1u);
  EXPECT_EQ(one.tables[0].columns[0].samples.size(), 1u);
}

TEST(Connector, SchemaSamplesAreStable) {
  auto a = sample_database()->get_schema(3).render();
  auto b = sample_database()->get_schema(3).render();
  EXPECT_EQ(a, b);
}

TEST(Connector, SameResultIsOrderInsensitive) {
  auto db = sample_database();
  auto a = db->execute_sql("SELECT name FROM singer ORDER BY name", 1000ms);
  auto b = db->execute_sql("SELECT name FROM singer ORDER BY name DESC", 1000ms);
  auto c = db->execute_sql("SELECT name FROM singer WHERE age > 30", 1000ms);
  EXPECT_TRUE(same_result(*a.result, *b.result));
  EXPECT_FALSE(same_result(*a.result, *c.result));
  auto i = db->execute_sql("SELECT 2", 1000ms);
  auto r = db->execute_sql("SELECT 2.0", 1000ms);
  EXPECT_TRUE(same_result(*i.result, *r.result));
}

TEST(Connector, OpenDatabaseSpec) {
  TempDir dir;
  auto sample = open_database(Json{{"location", "sample:"}}, dir.path());
  EXPECT_EQ(sample->dialect(), "sqlite");
  EXPECT_ERRC(open_database(Json{{"location", "missing.db"}}, dir.path()), Errc::kConnection);
  auto bundled = open_database(Json{{"location", "data/sample.db"}}, testing::source_path(""));
  EXPECT_EQ(bundled->get_schema(3).tables.size(), 3u);
}

class Text2SqlOps : public ::testing::Test {
 protected:
  void SetUp() override {
    register_text2sql_operators(ops);
    resources.put<DatabaseConnector>("database", sample_database());
  }

  RunReport run(const std::string& name, Dataset& data, const KeyBinding& binding,
                Json params = Json::object(), const ServingClient* serving = nullptr) {
    const auto* entry = ops.find(name);
    OperatorConfig cfg;
    cfg.params = params;
    if (params.contains("template")) cfg.template_id = params["template"].get<std::string>();
    cfg.templates = &templates;
    auto op = entry->configure(cfg);
    StorageSession s(data);
    auto report = run_operator(entry->descriptor, *op, s, binding, serving, resources, 11);
    data = s.read();
    std::vector<std::string> declared;
    for (const auto& r : entry->descriptor.output_roles) {
      auto it = binding.find(r.name);
      if (it != binding.end()) declared.push_back(it->second.front());
    }
    auto law = check_category_law(report, entry->descriptor.category, declared);
    EXPECT_FALSE(law) << *law;
    return report;
  }

  ServingClient client(std::vector<MockRule> rules) {
    BackendConfig c;
    c.script.rules = std::move(rules);
    return ServingClient(c, nullptr, std::make_shared<VirtualClock>());
  }

  OperatorRegistry ops;
  TemplateRegistry templates = TemplateRegistry::with_builtins();
  ResourceSet resources;
};

const KeyBinding kGenBinding{{"output_sql", {"sql"}}, {"output_complexity", {"complexity"}}};

TEST_F(Text2SqlOps, NineOperatorsRegistered) {
  EXPECT_EQ(ops.size(), 9u);
  EXPECT_TRUE(ops.naming_violations().empty());
}

TEST_F(Text2SqlOps, RowGeneratorExtractsSql) {
  auto serving = client({contains("## SQL generation", {"```sql\nSELECT name FROM singer\n```"})});
  Dataset d;
  auto r = run("SQLRowGenerator", d, kGenBinding, {{"count", 3}}, &serving);
  ASSERT_EQ(d.row_count(), 3u);
  EXPECT_EQ(d.at(0, "sql").as_text(), "SELECT name FROM singer");
  EXPECT_EQ(r.rows_out, 3u);
}

TEST_F(Text2SqlOps, RowGeneratorZeroCount) {
  auto serving = client({});
  Dataset d;
  run("SQLRowGenerator", d, kGenBinding, {{"count", 0}}, &serving);
  EXPECT_EQ(d.row_count(), 0u);
  EXPECT_EQ(serving.backend_calls(), 0u);
}

TEST_F(Text2SqlOps, RowGeneratorDropsUnextractable) {
  auto serving = client({contains("## SQL generation", {"I cannot help with that."})});
  Dataset d;
  auto r = run("SQLRowGenerator", d, kGenBinding, {{"count", 2}}, &serving);
  EXPECT_EQ(d.row_count(), 0u);
  EXPECT_EQ(r.failures, 2u);
  EXPECT_EQ(serving.backend_calls(), 6u);
}

TEST_F(Text2SqlOps, RowGeneratorComplexityFrequencies) {
  auto serving = client({contains("## SQL generation", {"```sql\nSELECT 1\n```"})});
  Dataset d;
  auto r = run("SQLRowGenerator", d, kGenBinding, {{"count", 1000}}, &serving);
  std::map<std::string, int> seen;
  for (const auto& v : d.column_values("complexity")) seen[v.as_text()]++;
  ASSERT_EQ(seen.size(), 4u);
  for (auto c : sql::kGenComplexities) {
    const int n = seen[std::string(sql::to_string(c))];
    EXPECT_GE(n, 200) << sql::to_string(c);
    EXPECT_LE(n, 300) << sql::to_string(c);
  }
  EXPECT_EQ(r.details["complexity_draws"].size(), 4u);
}

TEST_F(Text2SqlOps, RowGeneratorDialectMustMatch) {
  auto serving = client({});
  Dataset d;
  EXPECT_ERRC(run("SQLRowGenerator", d, kGenBinding, {{"count", 1}, {"template", "sql_gen_mysql"}}, &serving),
              Errc::kIncompatibleTemplate);
}

TEST_F(Text2SqlOps, AugmentOnePerSeed) {
  auto serving = client({contains("## SQL augmentation", {"```sql\nSELECT name FROM venue\n```"})});
  Dataset d = rows(Json::parse(R"([{"sql":"SELECT 1"},{"sql":"SELECT 2"},{"sql":"SELECT 3"},{"sql":"SELECT 4"},{"sql":"SELECT 5"}])"));
  run("SQLAugmentRowGenerator", d,
      {{"input_sql", {"sql"}}, {"output_strategy", {"strategy"}}, {"output_parent_index", {"parent"}}},
      Json::object(), &serving);
  ASSERT_EQ(d.row_count(), 10u);
  std::set<std::string> strategies;
  for (auto s : sql::kAugmentationStrategies) strategies.insert(std::string(sql::to_string(s)));
  for (std::size_t i = 5; i < 10; ++i) {
    EXPECT_EQ(d.at(i, "sql").as_text(), "SELECT name FROM venue");
    EXPECT_TRUE(strategies.count(d.at(i, "strategy").as_text()));
    EXPECT_EQ(d.at(i, "parent").as_number(), static_cast<double>(i - 5));
  }
}

const KeyBinding kConsistency{{"input_question", {"question"}}, {"input_sql", {"sql"}}};

Dataset three_pairs() {
  return rows(Json::parse(R"([
    {"question":"first?","sql":"SELECT 1"},
    {"question":"second?","sql":"SELECT 2"},
    {"question":"third?","sql":"SELECT 3"}])"));
}

TEST_F(Text2SqlOps, ConsistencyAllAligned) {
  auto serving = client({contains("## Consistency check", {R"({"aligned": true})"})});
  Dataset d = three_pairs();
  run("Text2SQLConsistencyFilter", d, kConsistency, Json::object(), &serving);
  EXPECT_EQ(d.row_count(), 3u);
}

TEST_F(Text2SqlOps, ConsistencyDropsUnaligned) {
  auto serving = client({contains("second?", {R"({"aligned": false})"}),
                         contains("## Consistency check", {R"({"aligned": true})"})});
  Dataset d = three_pairs();
  run("Text2SQLConsistencyFilter", d, kConsistency, Json::object(), &serving);
  ASSERT_EQ(d.row_count(), 2u);
  EXPECT_EQ(d.at(1, "question").as_text(), "third?");
}

TEST_F(Text2SqlOps, ConsistencyGarbageVerdict) {
  auto serving = client({contains("second?", {"maybe?"}),
                         contains("## Consistency check", {R"({"aligned": true})"})});
  Dataset d = three_pairs();
  auto r = run("Text2SQLConsistencyFilter", d, kConsistency, Json::object(), &serving);
  EXPECT_EQ(d.row_count(), 2u);
  EXPECT_EQ(r.details["verdict_failures"], 1);
  EXPECT_EQ(r.failures, 1u);
}

TEST_F(Text2SqlOps, ExecutionFilter) {
  Dataset d = rows(Json::parse(R"([{"sql":"SELECT 1"},{"sql":"SELEC 1"}])"));
  auto r = run("SQLExecutionFilter", d, {{"input_sql", {"sql"}}});
  ASSERT_EQ(d.row_count(), 1u);
  EXPECT_EQ(d.at(0, "sql").as_text(), "SELECT 1");
  EXPECT_EQ(r.details["dropped_by_kind"]["syntax"], 1);

  Dataset ok = rows(Json::parse(R"([{"sql":"SELECT name FROM singer"},{"sql":"SELECT 2"}])"));
  run("SQLExecutionFilter", ok, {{"input_sql", {"sql"}}});
  EXPECT_EQ(ok.row_count(), 2u);

  Dataset slow(std::vector<std::string>{"sql"});
  slow.append_row({FieldValue::text(kSlowQuery)});
  auto rs = run("SQLExecutionFilter", slow, {{"input_sql", {"sql"}}}, {{"timeout_ms", 10}});
  EXPECT_EQ(slow.row_count(), 0u);
  EXPECT_EQ(rs.details["dropped"][0]["kind"], "timeout");
}

TEST_F(Text2SqlOps, QuestionsAndStyles) {
  auto serving = client({contains("## Question generation", {"What is it?"})});
  Dataset d = rows(Json::parse(R"([{"sql":"SELECT 1"},{"sql":"SELECT 2"},{"sql":"SELECT 3"}])"));
  run("QuestionGenerator", d, {{"input_sql", {"sql"}}, {"output_question", {"question"}}, {"output_style", {"style"}}},
      Json::object(), &serving);
  std::set<std::string> styles;
  for (auto s : sql::kQuestionStyles) styles.insert(std::string(sql::to_string(s)));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(d.at(i, "question").as_text(), "What is it?");
    EXPECT_TRUE(styles.count(d.at(i, "style").as_text()));
  }
}

TEST_F(Text2SqlOps, QuestionStyleFrequencies) {
  auto serving = client({contains("## Question generation", {"Q?"})});
  Dataset d(std::vector<std::string>{"sql"});
  for (int i = 0; i < 1100; ++i) d.append_row({FieldValue::text("SELECT " + std::to_string(i))});
  run("QuestionGenerator", d, {{"input_sql", {"sql"}}, {"output_question", {"question"}}, {"output_style", {"style"}}},
      Json::object(), &serving);
  std::map<std::string, int> seen;
  for (const auto& v : d.column_values("style")) seen[v.as_text()]++;
  ASSERT_EQ(seen.size(), 11u);
  for (const auto& [style, n] : seen) {
    EXPECT_GE(n, 60) << style;
    EXPECT_LE(n, 140) << style;
  }
}

TEST_F(Text2SqlOps, QuestionsOnEmptyInput) {
  auto serving = client({});
  Dataset d(std::vector<std::string>{"sql"});
  run("QuestionGenerator", d, {{"input_sql", {"sql"}}, {"output_question", {"question"}}, {"output_style", {"style"}}},
      Json::object(), &serving);
  EXPECT_EQ(serving.backend_calls(), 0u);
}

const KeyBinding kCot{{"input_question", {"question"}}, {"input_sql", {"sql"}}, {"output_cot", {"cot"}}};

TEST_F(Text2SqlOps, CotValidatedByExecution) {
  auto serving = client({
      contains("same-sql", {"Reasoning.\n```sql\n{{last_sql_block}}\n```"}),
      contains("other-rows", {"Reasoning.\n```sql\nSELECT name FROM venue\n```"}),
      contains("equivalent", {"Reasoning.\n```sql\nSELECT name FROM singer WHERE NOT age <= 30 ORDER BY name\n```"}),
  });
  Dataset d = rows(Json::parse(R"([
    {"question":"same-sql","sql":"SELECT name FROM singer"},
    {"question":"other-rows","sql":"SELECT name FROM singer"},
    {"question":"equivalent","sql":"SELECT name FROM singer WHERE age > 30"}])"));
  auto r = run("CoTGenerator", d, kCot, {{"max_failure_rate", 1.0}}, &serving);
  EXPECT_FALSE(d.at(0, "cot").is_null());
  EXPECT_TRUE(d.at(1, "cot").is_null());
  EXPECT_FALSE(d.at(2, "cot").is_null());
  EXPECT_EQ(r.details["invalid_traces"], 1);
}

TEST_F(Text2SqlOps, CotReferenceFailure) {
  auto serving = client({contains("## Reasoning trace", {"```sql\nSELECT 1\n```"})});
  Dataset d = rows(Json::parse(R"([{"question":"q","sql":"SELECT title FROM album"}])"));
  auto r = run("CoTGenerator", d, kCot, Json::object(), &serving);
  EXPECT_TRUE(d.at(0, "cot").is_null());
  EXPECT_EQ(r.details["reference_failures"], 1);
}

TEST_F(Text2SqlOps, PromptComposition) {
  Dataset d = rows(Json::parse(R"([{"question":"How many singers?"},{"question":"How many singers?"}])"));
  run("PromptGenerator", d, {{"input_question", {"question"}}, {"output_prompt", {"prompt"}}});
  const auto& p = d.at(0, "prompt").as_text();
  EXPECT_NE(p.find("CREATE TABLE singer"), std::string::npos);
  EXPECT_NE(p.find("How many singers?"), std::string::npos);
  EXPECT_EQ(p, d.at(1, "prompt").as_text());
}

TEST_F(Text2SqlOps, PromptOnEmptySchema) {
  resources.put<DatabaseConnector>("database", SqliteConnector::from_script(""));
  Dataset d = rows(Json::parse(R"([{"question":"Anything?"}])"));
  run("PromptGenerator", d, {{"input_question", {"question"}}, {"output_prompt", {"prompt"}}});
  EXPECT_NE(d.at(0, "prompt").as_text().find("Anything?"), std::string::npos);
}

TEST_F(Text2SqlOps, ComponentDifficulty) {
  Dataset d = rows(Json::parse(R"([
    {"sql":"SELECT name FROM singer"},
    {"sql":"SELECT country, COUNT(*) FROM singer GROUP BY country"},
    {"sql":"SELECT name FROM singer WHERE id IN (SELECT sid FROM show GROUP BY sid HAVING COUNT(*) > 2) ORDER BY name"},
    {"sql":"not sql at all"}])"));
  auto r = run("SQLComponentSampleEvaluator", d, {{"input_sql", {"sql"}}, {"output_difficulty", {"d"}}});
  EXPECT_EQ(d.at(0, "d").as_text(), "simple");
  EXPECT_EQ(d.at(1, "d").as_text(), "moderate");
  EXPECT_EQ(d.at(2, "d").as_text(), "extra hard");
  EXPECT_TRUE(d.at(3, "d").is_null());
  EXPECT_EQ(r.failures, 1u);
}

TEST_F(Text2SqlOps, ExecutionDifficultyFromScriptedTrials) {
  // Trials 1..n reproduce the reference, the rest return something else.
  auto scripted = [&](int n) {
    std::vector<MockRule> rules;
    for (int t = 1; t <= 8; ++t) {
      rules.push_back(contains("## Execution trial " + std::to_string(t) + "\n",
                               {t <= n ? "```sql\nSELECT name FROM singer\n```" : "```sql\nSELECT 0\n```"}));
    }
    return client(rules);
  };
  const std::map<int, std::string> expected{{8, "simple"}, {5, "moderate"}, {3, "hard"}, {0, "extra hard"}};
  for (const auto& [n, label] : expected) {
    auto serving = scripted(n);
    Dataset d = rows(Json::parse(R"([{"prompt":"p","sql":"SELECT name FROM singer"}])"));
    run("SQLExecutionSampleEvaluator", d,
        {{"input_prompt", {"prompt"}}, {"input_sql", {"sql"}}, {"output_difficulty", {"e"}},
         {"output_k", {"k"}}, {"output_n", {"n"}}},
        Json::object(), &serving);
    EXPECT_EQ(d.at(0, "e").as_text(), label) << n;
    EXPECT_EQ(d.at(0, "n").as_number(), n);
    EXPECT_EQ(d.at(0, "k").as_number(), 8);
  }
}

TEST(Pipelines, CompileCleanly) {
  Catalog catalog;
  Text2SqlConfig cfg;
  auto gen = catalog.compile(build_generation_pipeline(cfg));
  ASSERT_TRUE(std::holds_alternative<CompiledPlan>(gen)) << std::get<CompileReport>(gen).to_text();
  const auto& gplan = std::get<CompiledPlan>(gen);
  ASSERT_EQ(gplan.nodes().size(), 7u);
  const std::vector<std::string> gen_order{"SQLRowGenerator", "SQLExecutionFilter", "QuestionGenerator",
                                           "CoTGenerator", "PromptGenerator", "SQLComponentSampleEvaluator",
                                           "SQLExecutionSampleEvaluator"};
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(gplan.nodes()[gplan.topo_order()[i]].name(), gen_order[i]);

  auto ref = catalog.compile(build_refinement_pipeline(cfg));
  ASSERT_TRUE(std::holds_alternative<CompiledPlan>(ref)) << std::get<CompileReport>(ref).to_text();
  const auto& rplan = std::get<CompiledPlan>(ref);
  ASSERT_EQ(rplan.nodes().size(), 9u);
  const std::vector<std::string> ref_order{"SQLExecutionFilter", "Text2SQLConsistencyFilter",
                                           "SQLAugmentRowGenerator", "SQLExecutionFilter"};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(rplan.nodes()[rplan.topo_order()[i]].name(), ref_order[i]);
}

TEST(Pipelines, ConfigValidation) {
  Text2SqlConfig cfg;
  cfg.exec_k = 0;
  EXPECT_ERRC(cfg.validate(), Errc::kInvalidConfig);
  Text2SqlConfig empty_db;
  empty_db.database = "";
  EXPECT_ERRC(empty_db.validate(), Errc::kInvalidConfig);
}

TEST(Pipelines, EmptyDatabaseYieldsNoRows) {
  TempDir dir;
  testing::write_file(dir / "empty.db", "");
  Text2SqlConfig cfg;
  cfg.database = (dir / "empty.db").string();
  auto def = build_generation_pipeline(cfg);
  Catalog catalog;
  auto compiled = catalog.compile(def);
  ASSERT_TRUE(std::holds_alternative<CompiledPlan>(compiled));
  auto runtime = open_runtime(def);
  StorageSession session(load_input(def));
  ExecutionEnv env{dir / "run", 42, runtime.serving.get(), &runtime.resources, std::nullopt};
  auto state = forward(std::get<CompiledPlan>(compiled), session, env);
  EXPECT_TRUE(state.finished);
  EXPECT_EQ(session.row_count(), 0u);
}

TEST(Pipelines, ShippedGenerationFileRuns) {
  auto def = PipelineDef::load(testing::source_path("pipelines/text2sql_generation.json"));
  Catalog catalog;
  auto compiled = catalog.compile(def);
  ASSERT_TRUE(std::holds_alternative<CompiledPlan>(compiled));
  auto runtime = open_runtime(def);
  StorageSession session(load_input(def));
  TempDir dir;
  ExecutionEnv env{dir / "run", 42, runtime.serving.get(), &runtime.resources, std::nullopt};
  auto state = forward(std::get<CompiledPlan>(compiled), session, env);
  ASSERT_TRUE(state.finished);
  Dataset out = session.read();
  EXPECT_GT(out.row_count(), 0u);
  for (const char* c : {"sql", "question", "cot", "prompt", "component_difficulty", "execution_difficulty"}) {
    for (std::size_t r = 0; r < out.row_count(); ++r) EXPECT_FALSE(out.at(r, c).is_null()) << c << " row " << r;
  }
}

}  // namespace
}  // namespace dataprep
