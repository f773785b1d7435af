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

#include "dataprep/text2sql.hpp"

namespace dataprep {
namespace {

NodeDef node(std::string name, KeyBinding bindings, Json config = Json::object()) {
  NodeDef n;
  n.operator_name = std::move(name);
  n.bindings = std::move(bindings);
  n.config = std::move(config);
  return n;
}

Json with_timeout(const Text2SqlConfig& c, Json config = Json::object()) {
  config["timeout_ms"] = c.timeout_ms;
  return config;
}

// Shared tail: question, reasoning trace, prompt, then the two difficulty labels.
void append_tail(PipelineDef& def, const Text2SqlConfig& c, Json question_config) {
  def.operators.push_back(node("QuestionGenerator",
                               {{"input_sql", {"sql"}},
                                {"output_question", {"question"}},
                                {"output_style", {"style"}}},
                               with_timeout(c, std::move(question_config))));
  def.operators.push_back(node(
      "CoTGenerator",
      {{"input_question", {"question"}}, {"input_sql", {"sql"}}, {"output_cot", {"cot"}}},
      with_timeout(c)));
  def.operators.push_back(node("PromptGenerator",
                               {{"input_question", {"question"}}, {"output_prompt", {"prompt"}}}));
  def.operators.push_back(node("SQLComponentSampleEvaluator",
                               {{"input_sql", {"sql"}},
                                {"output_difficulty", {"component_difficulty"}}}));
  def.operators.push_back(node("SQLExecutionSampleEvaluator",
                               {{"input_prompt", {"prompt"}},
                                {"input_sql", {"sql"}},
                                {"output_difficulty", {"execution_difficulty"}},
                                {"output_k", {"exec_k"}},
                                {"output_n", {"exec_n"}}},
                               with_timeout(c, {{"k", c.exec_k}})));

  def.required_output_columns = {"sql", "question", "prompt", "component_difficulty",
                                 "execution_difficulty"};
  if (!c.keep_invalid_cot) def.required_output_columns.push_back("cot");
}

PipelineDef common(const Text2SqlConfig& c) {
  c.validate();
  PipelineDef def;
  def.has_initial_columns = true;
  def.serving = c.serving;
  def.resources = {{"database", {{"location", c.database}, {"dialect", c.dialect}}}};
  return def;
}

}  // namespace

void Text2SqlConfig::validate() const {
  if (database.empty()) throw Error(Errc::kInvalidConfig, "database location is empty");
  if (exec_k < 1) throw Error(Errc::kInvalidConfig, "exec_k must be at least 1");
  if (timeout_ms <= 0) throw Error(Errc::kInvalidConfig, "timeout_ms must be positive");
  if (sql_template.empty()) throw Error(Errc::kInvalidConfig, "sql_template is empty");
  serving.validate();
}

PipelineDef build_generation_pipeline(const Text2SqlConfig& c) {
  PipelineDef def = common(c);
  def.storage.inline_rows = Json::array();
  def.operators.push_back(node(
      "SQLRowGenerator", {{"output_sql", {"sql"}}, {"output_complexity", {"complexity"}}},
      with_timeout(c, {{"template", c.sql_template},
                       {"count", static_cast<int>(c.generation_count)}})));
  def.operators.push_back(node("SQLExecutionFilter", {{"input_sql", {"sql"}}}, with_timeout(c)));
  append_tail(def, c, Json::object());
  return def;
}

PipelineDef build_refinement_pipeline(const Text2SqlConfig& c) {
  PipelineDef def = common(c);
  def.initial_columns = {{"question", Kind::kText}, {"sql", Kind::kText}};
  def.storage = c.seed_storage;
  if (!def.storage.location && !def.storage.inline_rows) def.storage.inline_rows = Json::array();
  def.operators.push_back(node("SQLExecutionFilter", {{"input_sql", {"sql"}}}, with_timeout(c)));
  def.operators.push_back(node("Text2SQLConsistencyFilter",
                               {{"input_question", {"question"}}, {"input_sql", {"sql"}}},
                               with_timeout(c)));
  def.operators.push_back(node("SQLAugmentRowGenerator",
                               {{"input_sql", {"sql"}},
                                {"output_strategy", {"augment_strategy"}},
                                {"output_parent_index", {"augment_parent"}}},
                               with_timeout(c)));
  def.operators.push_back(node("SQLExecutionFilter", {{"input_sql", {"sql"}}}, with_timeout(c)));
  // Seed rows keep their question; augmented rows get a fresh one.
  append_tail(def, c, {{"overwrite", true}, {"fill_missing", true}});
  return def;
}

}  // namespace dataprep
