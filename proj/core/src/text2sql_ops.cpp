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

#include <algorithm>
#include <map>
#include <set>

#include "dataprep/digest.hpp"
#include "dataprep/library.hpp"
#include "dataprep/text_util.hpp"
#include "dataprep/text2sql.hpp"
#include "op_support.hpp"

namespace dataprep {
namespace {

using detail::ensure_column;
using detail::text_cells;
using std::chrono::milliseconds;

struct DbParams {
  milliseconds timeout{5000};
  std::size_t sample_size = 3;

  static DbParams from(const OperatorConfig& cfg) {
    DbParams p;
    int t = cfg.param<int>("timeout_ms", 5000);
    if (t <= 0) throw Error(Errc::kInvalidConfig, "timeout_ms must be positive");
    p.timeout = milliseconds(t);
    int s = cfg.param<int>("sample_size", 3);
    if (s < 0) throw Error(Errc::kInvalidConfig, "sample_size must not be negative");
    p.sample_size = static_cast<std::size_t>(s);
    return p;
  }
};

std::shared_ptr<DatabaseConnector> database(RunContext& ctx) {
  return ctx.resource<DatabaseConnector>("database");
}

std::vector<GenerationResponse> dispatch(RunContext& ctx,
                                         const std::vector<GenerationRequest>& requests) {
  if (requests.empty()) return {};
  return ctx.serving().generate_from_input(requests);
}

bool has_sql(std::string_view reply) { return sql::extract_sql(reply).has_value(); }

GenerationRequest sql_request(std::string prompt) {
  GenerationRequest r;
  r.user_input = std::move(prompt);
  r.accept = has_sql;
  return r;
}

// --- SQLRowGenerator ------------------------------------------------------------

class SQLRowGenerator final : public Operator {
 public:
  SQLRowGenerator(std::shared_ptr<const PromptTemplate> tmpl, std::size_t count, DbParams db)
      : tmpl_(std::move(tmpl)), count_(count), db_(db) {}

  void run(RunContext& ctx) override {
    auto conn = database(ctx);
    if (tmpl_->dialect() && *tmpl_->dialect() != conn->dialect()) {
      throw Error(Errc::kIncompatibleTemplate, "template '" + tmpl_->identifier() +
                                                   "' targets " + *tmpl_->dialect() +
                                                   " but the database is " + conn->dialect());
    }
    const auto& sql_col = ctx.column("output_sql");
    const auto& cx_col = ctx.column("output_complexity");
    ensure_column(ctx.storage(), sql_col);
    ensure_column(ctx.storage(), cx_col);

    auto schema = conn->get_schema(db_.sample_size);
    if (count_ == 0 || schema.tables.empty()) {
      ctx.details()["requests"] = 0;
      return;
    }
    const auto rendered = schema.render();
    const auto& hints = sql::advanced_function_hints();
    std::vector<sql::GenComplexity> levels;
    std::vector<GenerationRequest> requests;
    for (std::size_t i = 0; i < count_; ++i) {
      auto level = sql::kGenComplexities[uniform_index(ctx.rng(), sql::kGenComplexities.size())];
      auto a = uniform_index(ctx.rng(), hints.size());
      auto b = uniform_index(ctx.rng(), hints.size() - 1);
      if (b >= a) ++b;
      levels.push_back(level);
      requests.push_back(sql_request(tmpl_->build_prompt({
          {"schema", rendered},
          {"complexity", std::string(sql::to_string(level))},
          {"complexity_definition", std::string(sql::complexity_definition(level))},
          {"functions", hints[a] + ", " + hints[b]},
      })));
    }
    auto responses = dispatch(ctx, requests);
    std::vector<Row> rows;
    std::size_t failed = 0;
    std::map<std::string, int> drawn;
    for (std::size_t i = 0; i < responses.size(); ++i) {
      drawn[std::string(sql::to_string(levels[i]))]++;
      auto text = responses[i].ok() ? sql::extract_sql(responses[i].text()) : std::nullopt;
      if (!text) {
        ++failed;
        continue;
      }
      rows.push_back({{sql_col, FieldValue::text(*text)},
                      {cx_col, FieldValue::text(std::string(sql::to_string(levels[i])))}});
    }
    ctx.add_failures(failed);
    ctx.details()["requests"] = requests.size();
    ctx.details()["dropped"] = failed;
    ctx.details()["complexity_draws"] = drawn;
    if (!rows.empty()) ctx.storage().write(AppendRows{std::move(rows)});
  }

 private:
  std::shared_ptr<const PromptTemplate> tmpl_;
  std::size_t count_;
  DbParams db_;
};

// --- SQLAugmentRowGenerator -----------------------------------------------------

class SQLAugmentRowGenerator final : public Operator {
 public:
  SQLAugmentRowGenerator(std::vector<std::shared_ptr<const PromptTemplate>> per_strategy,
                         DbParams db)
      : templates_(std::move(per_strategy)), db_(db) {}

  void run(RunContext& ctx) override {
    const auto& sql_col = ctx.column("input_sql");
    const auto& strategy_col = ctx.column("output_strategy");
    const auto& parent_col = ctx.column("output_parent_index");
    auto seeds = text_cells(ctx.storage().read({sql_col}), sql_col);
    ensure_column(ctx.storage(), strategy_col);
    ensure_column(ctx.storage(), parent_col);
    if (seeds.empty()) return;

    const auto schema = database(ctx)->get_schema(db_.sample_size).render();
    std::vector<GenerationRequest> requests;
    std::vector<std::size_t> parents;
    std::vector<sql::AugmentationStrategy> strategies;
    for (std::size_t r = 0; r < seeds.size(); ++r) {
      auto pick = uniform_index(ctx.rng(), sql::kAugmentationStrategies.size());
      if (!seeds[r]) continue;
      strategies.push_back(sql::kAugmentationStrategies[pick]);
      parents.push_back(r);
      requests.push_back(
          sql_request(templates_[pick]->build_prompt({{"schema", schema}, {"sql", *seeds[r]}})));
    }
    auto responses = dispatch(ctx, requests);
    std::vector<Row> rows;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < responses.size(); ++i) {
      auto text = responses[i].ok() ? sql::extract_sql(responses[i].text()) : std::nullopt;
      if (!text) {
        ++failed;
        continue;
      }
      rows.push_back(
          {{sql_col, FieldValue::text(*text)},
           {strategy_col, FieldValue::text(std::string(sql::to_string(strategies[i])))},
           {parent_col, FieldValue::integer(static_cast<std::int64_t>(parents[i]))}});
    }
    ctx.add_failures(failed);
    ctx.details()["augmented"] = rows.size();
    ctx.details()["dropped"] = failed;
    if (!rows.empty()) ctx.storage().write(AppendRows{std::move(rows)});
  }

 private:
  std::vector<std::shared_ptr<const PromptTemplate>> templates_;
  DbParams db_;
};

// --- Text2SQLConsistencyFilter --------------------------------------------------

class Text2SQLConsistencyFilter final : public Operator {
 public:
  Text2SQLConsistencyFilter(std::shared_ptr<const PromptTemplate> tmpl, DbParams db)
      : tmpl_(std::move(tmpl)), db_(db) {}

  void run(RunContext& ctx) override {
    const auto& q_col = ctx.column("input_question");
    const auto& s_col = ctx.column("input_sql");
    Dataset data = ctx.storage().read();
    auto questions = text_cells(data, q_col);
    auto sqls = text_cells(data, s_col);

    static const Json kVerdict = Json::parse(
        R"({"type":"object","properties":{"aligned":{"type":"boolean"}},"required":["aligned"]})");
    std::vector<GenerationRequest> requests;
    std::vector<std::size_t> rows;
    std::size_t incomplete = 0;
    if (data.row_count() > 0) {
      const auto schema = database(ctx)->get_schema(db_.sample_size).render();
      for (std::size_t r = 0; r < data.row_count(); ++r) {
        if (!questions[r] || !sqls[r]) {
          ++incomplete;
          continue;
        }
        GenerationRequest req;
        req.user_input = tmpl_->build_prompt(
            {{"schema", schema}, {"question", *questions[r]}, {"sql", *sqls[r]}});
        req.schema_constraint = kVerdict;
        requests.push_back(std::move(req));
        rows.push_back(r);
      }
    }
    auto responses = dispatch(ctx, requests);
    std::vector<std::size_t> keep;
    std::size_t verdict_failures = 0, unaligned = 0;
    for (std::size_t i = 0; i < responses.size(); ++i) {
      const auto& resp = responses[i];
      if (!resp.ok() || !resp.output || !resp.output->is_object()) {
        ++verdict_failures;
        continue;
      }
      if ((*resp.output)["aligned"].get<bool>()) {
        keep.push_back(rows[i]);
      } else {
        ++unaligned;
      }
    }
    ctx.add_failures(verdict_failures);
    ctx.details()["verdict_failures"] = verdict_failures;
    ctx.details()["unaligned"] = unaligned;
    ctx.details()["incomplete_rows"] = incomplete;
    Dataset next = data.select_rows(keep);
    if (ctx.bound("output_aligned")) {
      const auto& out = ctx.column("output_aligned");
      next.add_column(out);
      for (std::size_t r = 0; r < next.row_count(); ++r) next.set(r, out, FieldValue::boolean(true));
    }
    ctx.storage().write(ReplaceDataset{std::move(next)});
  }

 private:
  std::shared_ptr<const PromptTemplate> tmpl_;
  DbParams db_;
};

// --- SQLExecutionFilter ---------------------------------------------------------

class SQLExecutionFilter final : public Operator {
 public:
  explicit SQLExecutionFilter(DbParams db) : db_(db) {}

  void run(RunContext& ctx) override {
    const auto& s_col = ctx.column("input_sql");
    Dataset data = ctx.storage().read();
    auto sqls = text_cells(data, s_col);
    std::vector<std::size_t> keep;
    std::vector<double> millis;
    Json dropped = Json::array();
    std::map<std::string, int> by_kind;
    std::shared_ptr<DatabaseConnector> conn;
    if (data.row_count() > 0) conn = database(ctx);
    for (std::size_t r = 0; r < sqls.size(); ++r) {
      if (!sqls[r]) {
        dropped.push_back({{"row", r}, {"kind", "null"}, {"error", "no sql"}});
        by_kind["null"]++;
        continue;
      }
      auto outcome = conn->execute_sql(*sqls[r], db_.timeout);
      if (outcome.ok()) {
        keep.push_back(r);
        millis.push_back(std::chrono::duration<double, std::milli>(outcome.elapsed).count());
        continue;
      }
      auto kind = std::string(to_string(*outcome.failure));
      dropped.push_back({{"row", r}, {"kind", kind}, {"error", outcome.error}});
      by_kind[kind]++;
    }
    ctx.details()["dropped"] = std::move(dropped);
    ctx.details()["dropped_by_kind"] = by_kind;
    Dataset next = data.select_rows(keep);
    if (ctx.bound("output_exec_ms")) {
      const auto& out = ctx.column("output_exec_ms");
      next.add_column(out);
      for (std::size_t r = 0; r < next.row_count(); ++r) {
        next.set(r, out, FieldValue::number(millis[r]));
      }
    }
    ctx.storage().write(ReplaceDataset{std::move(next)});
  }

 private:
  DbParams db_;
};

// --- QuestionGenerator ----------------------------------------------------------

class QuestionGenerator final : public Operator {
 public:
  QuestionGenerator(std::vector<std::shared_ptr<const PromptTemplate>> per_style, bool fill_missing,
                    double max_failure_rate, DbParams db)
      : templates_(std::move(per_style)),
        fill_missing_(fill_missing),
        max_failure_rate_(max_failure_rate),
        db_(db) {}

  void run(RunContext& ctx) override {
    const auto& s_col = ctx.column("input_sql");
    const auto& q_col = ctx.column("output_question");
    const auto& style_col = ctx.column("output_style");
    Dataset data = ctx.storage().read();
    auto sqls = text_cells(data, s_col);
    std::vector<std::optional<std::string>> existing(data.row_count());
    if (fill_missing_ && data.has_column(q_col)) existing = text_cells(data, q_col);

    std::vector<GenerationRequest> requests;
    std::vector<std::size_t> rows;
    std::vector<std::size_t> styles(data.row_count());
    std::string schema;
    if (data.row_count() > 0) schema = database(ctx)->get_schema(db_.sample_size).render();
    for (std::size_t r = 0; r < data.row_count(); ++r) {
      styles[r] = uniform_index(ctx.rng(), sql::kQuestionStyles.size());
      if (!sqls[r] || existing[r]) continue;
      GenerationRequest req;
      req.user_input = templates_[styles[r]]->build_prompt({{"schema", schema}, {"sql", *sqls[r]}});
      requests.push_back(std::move(req));
      rows.push_back(r);
    }
    auto responses = dispatch(ctx, requests);
    std::vector<FieldValue> questions(data.row_count());
    std::vector<FieldValue> style_values(data.row_count());
    for (std::size_t r = 0; r < data.row_count(); ++r) {
      if (existing[r]) questions[r] = FieldValue::text(*existing[r]);
    }
    std::size_t failed = 0;
    for (std::size_t i = 0; i < responses.size(); ++i) {
      auto r = rows[i];
      style_values[r] = FieldValue::text(std::string(sql::to_string(sql::kQuestionStyles[styles[r]])));
      if (responses[i].ok()) {
        questions[r] = FieldValue::text(std::string(trim(responses[i].text())));
      } else {
        ++failed;
      }
    }
    ctx.add_failures(failed);
    ctx.details()["generated"] = rows.size() - failed;
    ctx.details()["kept_existing"] =
        std::count_if(existing.begin(), existing.end(), [](const auto& e) { return e.has_value(); });
    ctx.enforce_failure_rate(failed, rows.size(), max_failure_rate_);
    ctx.storage().write(NewColumn{q_col, std::move(questions)});
    ctx.storage().write(NewColumn{style_col, std::move(style_values)});
  }

 private:
  std::vector<std::shared_ptr<const PromptTemplate>> templates_;
  bool fill_missing_;
  double max_failure_rate_;
  DbParams db_;
};

// --- CoTGenerator ---------------------------------------------------------------

class CoTGenerator final : public Operator {
 public:
  CoTGenerator(std::shared_ptr<const PromptTemplate> tmpl, double max_failure_rate, DbParams db)
      : tmpl_(std::move(tmpl)), max_failure_rate_(max_failure_rate), db_(db) {}

  void run(RunContext& ctx) override {
    const auto& q_col = ctx.column("input_question");
    const auto& s_col = ctx.column("input_sql");
    const auto& out_col = ctx.column("output_cot");
    Dataset data = ctx.storage().read();
    auto questions = text_cells(data, q_col);
    auto sqls = text_cells(data, s_col);
    std::vector<FieldValue> cots(data.row_count());
    if (data.row_count() == 0) {
      ctx.storage().write(NewColumn{out_col, std::move(cots)});
      return;
    }
    auto conn = database(ctx);
    const auto schema = conn->get_schema(db_.sample_size).render();

    std::vector<GenerationRequest> requests;
    std::vector<std::size_t> rows;
    std::vector<ResultSet> references;
    std::size_t reference_failures = 0;
    for (std::size_t r = 0; r < data.row_count(); ++r) {
      if (!questions[r] || !sqls[r]) continue;
      auto ref = conn->execute_sql(*sqls[r], db_.timeout);
      if (!ref.ok()) {
        ++reference_failures;
        continue;
      }
      references.push_back(std::move(*ref.result));
      rows.push_back(r);
      requests.push_back(sql_request(tmpl_->build_prompt(
          {{"schema", schema}, {"question", *questions[r]}, {"sql", *sqls[r]}})));
    }
    auto responses = dispatch(ctx, requests);
    std::size_t failed = 0, invalid = 0;
    for (std::size_t i = 0; i < responses.size(); ++i) {
      if (!responses[i].ok()) {
        ++failed;
        continue;
      }
      auto trace = responses[i].text();
      auto predicted = sql::extract_sql(trace);
      bool valid = false;
      if (predicted) {
        auto got = conn->execute_sql(*predicted, db_.timeout);
        valid = got.ok() && same_result(*got.result, references[i]);
      }
      if (valid) {
        cots[rows[i]] = FieldValue::text(std::move(trace));
      } else {
        ++invalid;
      }
    }
    ctx.add_failures(failed + invalid + reference_failures);
    ctx.details()["generation_failures"] = failed;
    ctx.details()["invalid_traces"] = invalid;
    ctx.details()["reference_failures"] = reference_failures;
    ctx.enforce_failure_rate(failed, requests.size(), max_failure_rate_);
    ctx.storage().write(NewColumn{out_col, std::move(cots)});
  }

 private:
  std::shared_ptr<const PromptTemplate> tmpl_;
  double max_failure_rate_;
  DbParams db_;
};

// --- PromptGenerator ------------------------------------------------------------

constexpr std::string_view kDefaultInstructions =
    "You are a data science expert. Read the database schema and answer the question with "
    "one SQLite query. Think step by step, then give the final query in a ```sql code block.";

class PromptGenerator final : public Operator {
 public:
  PromptGenerator(std::shared_ptr<const PromptTemplate> tmpl, std::string instructions,
                  DbParams db)
      : tmpl_(std::move(tmpl)), instructions_(std::move(instructions)), db_(db) {}

  void run(RunContext& ctx) override {
    const auto& q_col = ctx.column("input_question");
    const auto& out_col = ctx.column("output_prompt");
    auto questions = text_cells(ctx.storage().read({q_col}), q_col);
    std::vector<FieldValue> prompts(questions.size());
    if (!questions.empty()) {
      const auto schema = database(ctx)->get_schema(db_.sample_size).render();
      for (std::size_t r = 0; r < questions.size(); ++r) {
        if (!questions[r]) continue;
        prompts[r] = FieldValue::text(tmpl_->build_prompt(
            {{"instructions", instructions_}, {"schema", schema}, {"question", *questions[r]}}));
      }
    }
    ctx.storage().write(NewColumn{out_col, std::move(prompts)});
  }

 private:
  std::shared_ptr<const PromptTemplate> tmpl_;
  std::string instructions_;
  DbParams db_;
};

// --- SQLComponentSampleEvaluator ------------------------------------------------

class SQLComponentSampleEvaluator final : public Operator {
 public:
  explicit SQLComponentSampleEvaluator(sql::ComponentRules rules) : rules_(rules) {}

  void run(RunContext& ctx) override {
    const auto& s_col = ctx.column("input_sql");
    const auto& out_col = ctx.column("output_difficulty");
    auto sqls = text_cells(ctx.storage().read({s_col}), s_col);
    std::vector<FieldValue> labels(sqls.size());
    std::size_t unparseable = 0;
    for (std::size_t r = 0; r < sqls.size(); ++r) {
      if (!sqls[r]) continue;
      auto features = sql::scan(*sqls[r]);
      if (!features) {
        ++unparseable;
        continue;
      }
      labels[r] = FieldValue::text(std::string(sql::to_string(rules_.classify(*features))));
    }
    ctx.add_failures(unparseable);
    ctx.details()["unparseable"] = unparseable;
    ctx.storage().write(NewColumn{out_col, std::move(labels)});
  }

 private:
  sql::ComponentRules rules_;
};

// --- SQLExecutionSampleEvaluator ------------------------------------------------

class SQLExecutionSampleEvaluator final : public Operator {
 public:
  SQLExecutionSampleEvaluator(std::shared_ptr<const PromptTemplate> tmpl, int k,
                              double temperature, sql::ExecutionThresholds thresholds,
                              DbParams db)
      : tmpl_(std::move(tmpl)), k_(k), temperature_(temperature), thresholds_(thresholds), db_(db) {}

  void run(RunContext& ctx) override {
    const auto& p_col = ctx.column("input_prompt");
    const auto& s_col = ctx.column("input_sql");
    const auto& d_col = ctx.column("output_difficulty");
    const auto& k_col = ctx.column("output_k");
    const auto& n_col = ctx.column("output_n");
    Dataset data = ctx.storage().read();
    auto prompts = text_cells(data, p_col);
    auto sqls = text_cells(data, s_col);
    const auto rows_n = data.row_count();
    std::vector<FieldValue> diffs(rows_n), ks(rows_n), ns(rows_n);

    std::vector<GenerationRequest> requests;
    std::vector<std::size_t> rows;
    std::vector<ResultSet> references;
    std::size_t reference_failures = 0;
    std::shared_ptr<DatabaseConnector> conn;
    if (rows_n > 0) conn = database(ctx);
    for (std::size_t r = 0; r < rows_n; ++r) {
      if (!prompts[r] || !sqls[r]) continue;
      auto ref = conn->execute_sql(*sqls[r], db_.timeout);
      if (!ref.ok()) {
        ++reference_failures;
        continue;
      }
      references.push_back(std::move(*ref.result));
      rows.push_back(r);
      for (int t = 1; t <= k_; ++t) {
        GenerationRequest req;
        req.user_input =
            tmpl_->build_prompt({{"prompt", *prompts[r]}, {"trial", std::to_string(t)}});
        req.sampling.temperature = temperature_;
        requests.push_back(std::move(req));
      }
    }
    auto responses = dispatch(ctx, requests);
    std::map<std::string, int> histogram;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sql::ExecTrialResult trial{k_, 0};
      for (int t = 0; t < k_; ++t) {
        const auto& resp = responses[i * static_cast<std::size_t>(k_) + static_cast<std::size_t>(t)];
        if (!resp.ok()) continue;
        auto predicted = sql::extract_sql(resp.text());
        if (!predicted) continue;
        auto got = conn->execute_sql(*predicted, db_.timeout);
        if (got.ok() && same_result(*got.result, references[i])) ++trial.n;
      }
      auto label = std::string(sql::to_string(thresholds_.classify(trial.n, trial.k)));
      histogram[label]++;
      diffs[rows[i]] = FieldValue::text(label);
      ks[rows[i]] = FieldValue::integer(trial.k);
      ns[rows[i]] = FieldValue::integer(trial.n);
    }
    ctx.add_failures(reference_failures);
    ctx.details()["reference_failures"] = reference_failures;
    ctx.details()["labels"] = histogram;
    ctx.storage().write(NewColumn{d_col, std::move(diffs)});
    ctx.storage().write(NewColumn{k_col, std::move(ks)});
    ctx.storage().write(NewColumn{n_col, std::move(ns)});
  }

 private:
  std::shared_ptr<const PromptTemplate> tmpl_;
  int k_;
  double temperature_;
  sql::ExecutionThresholds thresholds_;
  DbParams db_;
};

// --- registration ---------------------------------------------------------------

OperatorDescriptor domain(std::string name, Category category) {
  OperatorDescriptor d;
  d.name = std::move(name);
  d.category = category;
  d.tier = Tier::kDomain;
  d.resources = {"database"};
  return d;
}

std::vector<std::string> strategy_templates() {
  std::vector<std::string> out;
  for (auto s : sql::kAugmentationStrategies) out.push_back("sql_augment_" + std::string(sql::to_string(s)));
  return out;
}

std::vector<std::string> style_templates() {
  std::vector<std::string> out;
  for (auto s : sql::kQuestionStyles) out.push_back("question_style_" + std::string(sql::to_string(s)));
  return out;
}

std::vector<std::shared_ptr<const PromptTemplate>> bind_all(const OperatorDescriptor& d,
                                                            const OperatorConfig& cfg) {
  if (cfg.templates == nullptr) {
    throw Error(Errc::kInvalidConfig, d.name + ": no template registry supplied");
  }
  std::vector<std::shared_ptr<const PromptTemplate>> out;
  for (const auto& id : d.allowed_prompt_templates) {
    out.push_back(bind_template(d, id, *cfg.templates).tmpl);
  }
  return out;
}

double failure_rate(const OperatorConfig& cfg) {
  double rate = cfg.param<double>("max_failure_rate", kDefaultMaxFailureRate);
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw Error(Errc::kInvalidConfig, "max_failure_rate must lie in [0, 1]");
  }
  return rate;
}

}  // namespace

void register_text2sql_operators(OperatorRegistry& registry) {
  {
    auto d = domain("SQLRowGenerator", Category::kGenerateRows);
    d.output_roles = {{"output_sql", Kind::kText}, {"output_complexity", Kind::kText}};
    d.allowed_prompt_templates = {"sql_gen_sqlite", "sql_gen_mysql", "sql_gen_vector"};
    d.requires_serving = true;
    d.description = "Generates SQL from the database schema at a randomly drawn complexity.";
    registry.add(std::move(d), [](const OperatorDescriptor& desc, const OperatorConfig& cfg) {
      int count = cfg.param<int>("count", 10);
      if (count < 0) throw Error(Errc::kInvalidConfig, "count must not be negative");
      return std::make_unique<SQLRowGenerator>(detail::configured_template(desc, cfg),
                                               static_cast<std::size_t>(count), DbParams::from(cfg));
    });
  }
  {
    auto d = domain("SQLAugmentRowGenerator", Category::kGenerateRows);
    d.input_roles = {{"input_sql", Kind::kText}};
    d.output_roles = {{"output_strategy", Kind::kText}, {"output_parent_index", Kind::kNumber}};
    d.allowed_prompt_templates = strategy_templates();
    d.requires_serving = true;
    d.description = "Adds one augmented query per seed using a randomly drawn strategy.";
    registry.add(std::move(d), [](const OperatorDescriptor& desc, const OperatorConfig& cfg) {
      return std::make_unique<SQLAugmentRowGenerator>(bind_all(desc, cfg), DbParams::from(cfg));
    });
  }
  {
    auto d = domain("Text2SQLConsistencyFilter", Category::kFilter);
    d.input_roles = {{"input_question", Kind::kText}, {"input_sql", Kind::kText}};
    d.output_roles = {{"output_aligned", Kind::kBoolean, false, /*optional=*/true}};
    d.allowed_prompt_templates = {"text2sql_consistency"};
    d.requires_serving = true;
    d.description = "Drops question/SQL pairs a model judges to be misaligned.";
    registry.add(std::move(d), [](const OperatorDescriptor& desc, const OperatorConfig& cfg) {
      return std::make_unique<Text2SQLConsistencyFilter>(detail::configured_template(desc, cfg),
                                                         DbParams::from(cfg));
    });
  }
  {
    auto d = domain("SQLExecutionFilter", Category::kFilter);
    d.input_roles = {{"input_sql", Kind::kText}};
    d.output_roles = {{"output_exec_ms", Kind::kNumber, false, /*optional=*/true}};
    d.description = "Keeps queries that execute successfully within the timeout.";
    registry.add(std::move(d), [](const OperatorDescriptor&, const OperatorConfig& cfg) {
      return std::make_unique<SQLExecutionFilter>(DbParams::from(cfg));
    });
  }
  {
    auto d = domain("QuestionGenerator", Category::kGenerateField);
    d.input_roles = {{"input_sql", Kind::kText}};
    d.output_roles = {{"output_question", Kind::kText}, {"output_style", Kind::kText}};
    d.allowed_prompt_templates = style_templates();
    d.requires_serving = true;
    d.description = "Writes a natural-language question for each query in a random style.";
    registry.add(std::move(d), [](const OperatorDescriptor& desc, const OperatorConfig& cfg) {
      return std::make_unique<QuestionGenerator>(bind_all(desc, cfg),
                                                 cfg.param<bool>("fill_missing", false),
                                                 failure_rate(cfg), DbParams::from(cfg));
    });
  }
  {
    auto d = domain("CoTGenerator", Category::kGenerateField);
    d.input_roles = {{"input_question", Kind::kText}, {"input_sql", Kind::kText}};
    d.output_roles = {{"output_cot", Kind::kText}};
    d.allowed_prompt_templates = {"cot_generation"};
    d.requires_serving = true;
    d.description = "Writes a reasoning trace, kept only if its final SQL matches the reference result.";
    registry.add(std::move(d), [](const OperatorDescriptor& desc, const OperatorConfig& cfg) {
      return std::make_unique<CoTGenerator>(detail::configured_template(desc, cfg),
                                            failure_rate(cfg), DbParams::from(cfg));
    });
  }
  {
    auto d = domain("PromptGenerator", Category::kGenerateField);
    d.input_roles = {{"input_question", Kind::kText}};
    d.output_roles = {{"output_prompt", Kind::kText}};
    d.allowed_prompt_templates = {"prompt_assembly"};
    d.description = "Assembles instructions, schema and question into a training prompt.";
    registry.add(std::move(d), [](const OperatorDescriptor& desc, const OperatorConfig& cfg) {
      return std::make_unique<PromptGenerator>(
          detail::configured_template(desc, cfg),
          cfg.param<std::string>("instructions", std::string(kDefaultInstructions)),
          DbParams::from(cfg));
    });
  }
  {
    OperatorDescriptor d;
    d.name = "SQLComponentSampleEvaluator";
    d.category = Category::kEvaluateSample;
    d.tier = Tier::kDomain;
    d.input_roles = {{"input_sql", Kind::kText}};
    d.output_roles = {{"output_difficulty", Kind::kText}};
    d.description = "Labels each query by syntactic component difficulty.";
    registry.add(std::move(d), [](const OperatorDescriptor&, const OperatorConfig& cfg) {
      sql::ComponentRules rules;
      rules.moderate_from = cfg.param<int>("moderate_from", rules.moderate_from);
      rules.hard_from = cfg.param<int>("hard_from", rules.hard_from);
      rules.extra_hard_from = cfg.param<int>("extra_hard_from", rules.extra_hard_from);
      if (!(rules.moderate_from <= rules.hard_from && rules.hard_from <= rules.extra_hard_from)) {
        throw Error(Errc::kInvalidConfig, "difficulty bands must be non-decreasing");
      }
      return std::make_unique<SQLComponentSampleEvaluator>(rules);
    });
  }
  {
    auto d = domain("SQLExecutionSampleEvaluator", Category::kEvaluateSample);
    d.input_roles = {{"input_prompt", Kind::kText}, {"input_sql", Kind::kText}};
    d.output_roles = {{"output_difficulty", Kind::kText},
                      {"output_k", Kind::kNumber},
                      {"output_n", Kind::kNumber}};
    d.allowed_prompt_templates = {"sql_exec_trial"};
    d.requires_serving = true;
    d.description = "Labels each prompt by how often k sampled generations reproduce the reference result.";
    registry.add(std::move(d), [](const OperatorDescriptor& desc, const OperatorConfig& cfg) {
      int k = cfg.param<int>("k", 8);
      if (k < 1) throw Error(Errc::kInvalidConfig, "k must be at least 1");
      sql::ExecutionThresholds th;
      th.simple_from = cfg.param<double>("simple_from", th.simple_from);
      th.moderate_from = cfg.param<double>("moderate_from", th.moderate_from);
      if (!(0.0 < th.moderate_from && th.moderate_from <= th.simple_from && th.simple_from <= 1.0)) {
        throw Error(Errc::kInvalidConfig, "execution bands need 0 < moderate_from <= simple_from <= 1");
      }
      return std::make_unique<SQLExecutionSampleEvaluator>(
          detail::configured_template(desc, cfg), k, cfg.param<double>("temperature", 0.8), th,
          DbParams::from(cfg));
    });
  }
}

}  // namespace dataprep
