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
#include <cmath>
#include <set>
#include <unordered_set>

#include "dataprep/digest.hpp"
#include "dataprep/library.hpp"
#include "dataprep/text_util.hpp"
#include "op_support.hpp"

namespace dataprep {

// --- shared helpers -----------------------------------------------------------

namespace detail {

std::shared_ptr<const PromptTemplate> configured_template(const OperatorDescriptor& d,
                                                          const OperatorConfig& cfg) {
  if (cfg.templates == nullptr) {
    throw Error(Errc::kInvalidConfig, d.name + ": no template registry supplied");
  }
  std::string id;
  if (cfg.template_id) {
    id = *cfg.template_id;
  } else if (!d.allowed_prompt_templates.empty()) {
    id = d.allowed_prompt_templates.front();
  } else {
    throw Error(Errc::kInvalidConfig, d.name + ": no prompt template configured");
  }
  return bind_template(d, id, *cfg.templates).tmpl;
}

std::vector<std::optional<std::string>> text_cells(const Dataset& data,
                                                   const std::string& column) {
  auto idx = data.column_index(column);
  if (!idx) throw MissingColumnError(column, data.columns());
  std::vector<std::optional<std::string>> out;
  out.reserve(data.row_count());
  for (std::size_t r = 0; r < data.row_count(); ++r) {
    const auto& cell = data.at(r, *idx);
    if (cell.is_null()) {
      out.emplace_back();
    } else if (cell.kind() == Kind::kText) {
      out.emplace_back(cell.as_text());
    } else {
      throw Error(Errc::kKindMismatch, "row " + std::to_string(r) + ": column '" + column +
                                           "' holds " + std::string(to_string(cell.kind())) +
                                           ", expected text");
    }
  }
  return out;
}

std::vector<std::optional<std::string>> generate_all(RunContext& ctx,
                                                     const std::vector<std::string>& prompts) {
  std::vector<std::optional<std::string>> out(prompts.size());
  if (prompts.empty()) return out;
  auto responses = ctx.serving().generate_from_input(prompts);
  std::size_t failed = 0;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (responses[i].ok()) {
      out[i] = responses[i].text();
    } else {
      ++failed;
    }
  }
  ctx.add_failures(failed);
  return out;
}

void ensure_column(StorageSession& session, const std::string& column) {
  auto cols = session.columns();
  if (std::find(cols.begin(), cols.end(), column) != cols.end()) return;
  session.write(NewColumn{column, std::vector<FieldValue>(session.row_count())});
}

FieldValue text_or_null(const std::optional<std::string>& value) {
  return value ? FieldValue::text(*value) : FieldValue::null();
}

}  // namespace detail

using detail::text_cells;

// --- text rules ---------------------------------------------------------------

namespace {

bool is_space(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\f': case U'\v':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029: case 0x202F:
    case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool scheme_at(std::string_view text, std::size_t pos, std::size_t& scheme_len) {
  auto matches = [&](std::string_view word) {
    if (pos + word.size() > text.size()) return false;
    for (std::size_t k = 0; k < word.size(); ++k) {
      char c = text[pos + k];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      if (c != word[k]) return false;
    }
    return true;
  };
  if (matches("https://")) {
    scheme_len = 8;
    return true;
  }
  if (matches("http://")) {
    scheme_len = 7;
    return true;
  }
  return false;
}

}  // namespace

std::string remove_urls(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t scheme = 0;
    if (scheme_at(text, i, scheme)) {
      std::size_t j = i + scheme;
      char32_t cp;
      while (j < text.size()) {
        auto len = utf8_decode(text, j, cp);
        if (is_space(cp)) break;
        j += len;
      }
      i = j;
      continue;
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

const std::vector<CodepointRange>& emoji_ranges() {
  static const std::vector<CodepointRange> ranges = {
      {0x2600, 0x26FF},   {0x2700, 0x27BF},   {0xFE0F, 0xFE0F},   {0x1F1E6, 0x1F1FF},
      {0x1F300, 0x1F5FF}, {0x1F600, 0x1F64F}, {0x1F680, 0x1F6FF}, {0x1F900, 0x1F9FF},
      {0x1FA70, 0x1FAFF},
  };
  return ranges;
}

std::string remove_codepoints(std::string_view text, const std::vector<CodepointRange>& ranges) {
  std::string out;
  out.reserve(text.size());
  char32_t cp;
  for (std::size_t i = 0; i < text.size();) {
    auto len = utf8_decode(text, i, cp);
    bool drop = len > 1 && std::any_of(ranges.begin(), ranges.end(), [&](const auto& r) {
      return cp >= r.first && cp <= r.last;
    });
    if (!drop) out.append(text.substr(i, len));
    i += len;
  }
  return out;
}

void ScoreThresholdConfig::validate() const {
  if (!std::isfinite(minimum)) throw Error(Errc::kInvalidConfig, "minimum must be finite");
  if (maximum && *maximum < minimum) {
    throw Error(Errc::kInvalidConfig, "maximum must not be below minimum");
  }
}

bool ScoreThresholdConfig::keeps(double score) const {
  bool above = keep_on_equal ? score >= minimum : score > minimum;
  if (!above) return false;
  if (!maximum) return true;
  return keep_on_equal ? score <= *maximum : score < *maximum;
}

// --- operators ----------------------------------------------------------------

namespace {

/// Rewrites one text column through a pure function; null stays null.
class TextRewriteRefiner final : public Operator {
 public:
  explicit TextRewriteRefiner(std::function<std::string(std::string_view)> fn)
      : fn_(std::move(fn)) {}

  void run(RunContext& ctx) override {
    const auto& in = ctx.column("input_key");
    const auto& out = ctx.column("output_key");
    auto cells = text_cells(ctx.storage().read({in}), in);
    std::vector<FieldValue> values;
    values.reserve(cells.size());
    for (const auto& c : cells) values.push_back(c ? FieldValue::text(fn_(*c)) : FieldValue());
    ctx.storage().write(NewColumn{out, std::move(values)});
  }

 private:
  std::function<std::string(std::string_view)> fn_;
};

std::vector<CodepointRange> ranges_from_config(const OperatorConfig& cfg) {
  std::vector<CodepointRange> ranges;
  auto classes = cfg.param<std::vector<std::string>>("classes", {});
  auto custom = cfg.params.value("ranges", Json::array());
  if (classes.empty() && custom.empty()) classes.push_back("emoji");
  for (const auto& c : classes) {
    if (c != "emoji") {
      throw Error(Errc::kInvalidConfig, "unknown codepoint class '" + c + "'");
    }
    const auto& e = emoji_ranges();
    ranges.insert(ranges.end(), e.begin(), e.end());
  }
  for (const auto& r : custom) {
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_unsigned() ||
        !r[1].is_number_unsigned() || r[0].get<std::uint32_t>() > r[1].get<std::uint32_t>()) {
      throw Error(Errc::kInvalidConfig, "ranges must be [first, last] codepoint pairs");
    }
    ranges.push_back({r[0].get<char32_t>(), r[1].get<char32_t>()});
  }
  return ranges;
}

class ExactDedupFilter final : public Operator {
 public:
  void run(RunContext& ctx) override {
    const auto& keys = ctx.columns("input_keys");
    Dataset data = ctx.storage().read();
    std::vector<std::size_t> idx;
    for (const auto& k : keys) {
      auto i = data.column_index(k);
      if (!i) throw MissingColumnError(k, data.columns());
      idx.push_back(*i);
    }
    std::unordered_set<std::string> seen;
    std::vector<std::size_t> keep;
    std::vector<FieldValue> digests;
    for (std::size_t r = 0; r < data.row_count(); ++r) {
      Json tuple = Json::array();
      for (auto i : idx) tuple.push_back(data.at(r, i).json());
      auto key = tuple.dump();
      if (seen.insert(key).second) {
        keep.push_back(r);
        digests.push_back(FieldValue::text(sha256_hex(key).substr(0, 16)));
      }
    }
    Dataset next = data.select_rows(keep);
    if (ctx.bound("output_digest")) {
      const auto& col = ctx.column("output_digest");
      next.add_column(col);
      for (std::size_t r = 0; r < next.row_count(); ++r) next.set(r, col, digests[r]);
    }
    ctx.storage().write(ReplaceDataset{std::move(next)});
  }
};

class LengthSampleEvaluator final : public Operator {
 public:
  void run(RunContext& ctx) override {
    const auto& in = ctx.column("input_key");
    const auto& out = ctx.column("output_key");
    if (ctx.storage().read().has_column(out)) {
      throw Error(Errc::kInvalidConfig, "output column '" + out + "' already exists");
    }
    auto cells = text_cells(ctx.storage().read({in}), in);
    std::vector<FieldValue> values;
    values.reserve(cells.size());
    for (const auto& c : cells) {
      values.push_back(c ? FieldValue::integer(static_cast<std::int64_t>(utf8_length(*c)))
                         : FieldValue());
    }
    ctx.storage().write(NewColumn{out, std::move(values)});
  }
};

class ScoreThresholdFilter final : public Operator {
 public:
  explicit ScoreThresholdFilter(ScoreThresholdConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  void run(RunContext& ctx) override {
    const auto& col = ctx.column("input_score");
    Dataset data = ctx.storage().read();
    auto ci = data.column_index(col);
    if (!ci) throw MissingColumnError(col, data.columns());
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < data.row_count(); ++r) {
      const auto& cell = data.at(r, *ci);
      if (cell.kind() != Kind::kNumber) {
        throw Error(Errc::kKindMismatch, "row " + std::to_string(r) + ": score column '" + col +
                                             "' holds " + std::string(to_string(cell.kind())) +
                                             ", expected number");
      }
      if (cfg_.keeps(cell.as_number())) keep.push_back(r);
    }
    Dataset next = data.select_rows(keep);
    if (ctx.bound("output_passed")) {
      const auto& out = ctx.column("output_passed");
      next.add_column(out);
      for (std::size_t r = 0; r < next.row_count(); ++r) next.set(r, out, FieldValue::boolean(true));
    }
    ctx.storage().write(ReplaceDataset{std::move(next)});
  }

 private:
  ScoreThresholdConfig cfg_;
};

class TextStatsDatasetEvaluator final : public Operator {
 public:
  void run(RunContext& ctx) override {
    const auto& in = ctx.column("input_key");
    auto cells = text_cells(ctx.storage().read({in}), in);
    std::size_t nulls = 0, total = 0, lo = 0, hi = 0, n = 0;
    std::set<std::string> distinct;
    for (const auto& c : cells) {
      if (!c) {
        ++nulls;
        continue;
      }
      auto len = utf8_length(*c);
      lo = n == 0 ? len : std::min(lo, len);
      hi = std::max(hi, len);
      total += len;
      ++n;
      distinct.insert(*c);
    }
    ctx.set_metric("rows", static_cast<double>(cells.size()));
    ctx.set_metric("null_count", static_cast<double>(nulls));
    ctx.set_metric("distinct_count", static_cast<double>(distinct.size()));
    ctx.set_metric("min_length", static_cast<double>(lo));
    ctx.set_metric("max_length", static_cast<double>(hi));
    ctx.set_metric("mean_length", n == 0 ? 0.0 : static_cast<double>(total) / n);
  }
};

class AnswerGenerator final : public Operator {
 public:
  AnswerGenerator(std::shared_ptr<const PromptTemplate> tmpl, double max_failure_rate)
      : tmpl_(std::move(tmpl)), max_failure_rate_(max_failure_rate) {}

  void run(RunContext& ctx) override {
    const auto& in = ctx.column("input_question");
    const auto& out = ctx.column("output_answer");
    auto questions = text_cells(ctx.storage().read({in}), in);
    std::vector<std::string> prompts;
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < questions.size(); ++r) {
      if (!questions[r]) continue;
      prompts.push_back(tmpl_->build_prompt({{"question", *questions[r]}}));
      rows.push_back(r);
    }
    auto replies = detail::generate_all(ctx, prompts);
    std::vector<FieldValue> values(questions.size());
    std::size_t failed = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!replies[i]) ++failed;
      values[rows[i]] = detail::text_or_null(replies[i]);
    }
    ctx.details()["failed_rows"] = failed;
    ctx.enforce_failure_rate(failed, rows.size(), max_failure_rate_);
    ctx.storage().write(NewColumn{out, std::move(values)});
  }

 private:
  std::shared_ptr<const PromptTemplate> tmpl_;
  double max_failure_rate_;
};

class QualityScoreSampleEvaluator final : public Operator {
 public:
  QualityScoreSampleEvaluator(std::shared_ptr<const PromptTemplate> tmpl, double max_failure_rate)
      : tmpl_(std::move(tmpl)), max_failure_rate_(max_failure_rate) {}

  void run(RunContext& ctx) override {
    const auto& in = ctx.column("input_key");
    const auto& out = ctx.column("output_score");
    auto texts = text_cells(ctx.storage().read({in}), in);
    std::vector<std::string> prompts;
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < texts.size(); ++r) {
      if (!texts[r]) continue;
      prompts.push_back(tmpl_->build_prompt({{"text", *texts[r]}}));
      rows.push_back(r);
    }
    static const Json kScore = Json::parse(
        R"({"type":"object","properties":{"score":{"type":"number"}},"required":["score"]})");
    std::vector<GenerationResponse> replies;
    if (!prompts.empty()) replies = ctx.serving().generate_from_input(prompts, std::nullopt, std::optional<Json>(kScore));
    std::vector<FieldValue> values(texts.size());
    std::size_t failed = 0;
    for (std::size_t i = 0; i < replies.size(); ++i) {
      if (!replies[i].ok() || !replies[i].output || !replies[i].output->is_object()) {
        ++failed;
        continue;
      }
      values[rows[i]] = FieldValue::number((*replies[i].output)["score"].get<double>());
    }
    ctx.add_failures(failed);
    ctx.details()["failed_rows"] = failed;
    ctx.enforce_failure_rate(failed, rows.size(), max_failure_rate_);
    ctx.storage().write(NewColumn{out, std::move(values)});
  }

 private:
  std::shared_ptr<const PromptTemplate> tmpl_;
  double max_failure_rate_;
};

class VariantRowGenerator final : public Operator {
 public:
  VariantRowGenerator(std::shared_ptr<const PromptTemplate> tmpl, int variants,
                      double max_failure_rate)
      : tmpl_(std::move(tmpl)), variants_(variants), max_failure_rate_(max_failure_rate) {}

  void run(RunContext& ctx) override {
    const auto& in = ctx.column("input_key");
    const auto& parent = ctx.column("output_parent_index");
    Dataset data = ctx.storage().read();
    auto texts = text_cells(data, in);
    std::vector<std::string> prompts;
    std::vector<std::size_t> origin;
    for (std::size_t r = 0; r < texts.size(); ++r) {
      if (!texts[r]) continue;
      for (int v = 1; v <= variants_; ++v) {
        prompts.push_back(
            tmpl_->build_prompt({{"text", *texts[r]}, {"variant", std::to_string(v)}}));
        origin.push_back(r);
      }
    }
    auto replies = detail::generate_all(ctx, prompts);
    std::size_t failed = 0;
    std::vector<Row> rows;
    for (std::size_t i = 0; i < replies.size(); ++i) {
      if (!replies[i]) {
        ++failed;
        continue;
      }
      Row row;
      const auto& src = data.row(origin[i]);
      for (std::size_t c = 0; c < data.column_count(); ++c) {
        const auto& name = data.columns()[c];
        if (name == in) {
          row.emplace_back(name, FieldValue::text(*replies[i]));
        } else if (name != parent) {
          row.emplace_back(name, src[c]);
        }
      }
      row.emplace_back(parent, FieldValue::integer(static_cast<std::int64_t>(origin[i])));
      rows.push_back(std::move(row));
    }
    ctx.enforce_failure_rate(failed, prompts.size(), max_failure_rate_);
    ctx.details()["variants_added"] = rows.size();
    detail::ensure_column(ctx.storage(), parent);
    if (!rows.empty()) ctx.storage().write(AppendRows{std::move(rows)});
  }

 private:
  std::shared_ptr<const PromptTemplate> tmpl_;
  int variants_;
  double max_failure_rate_;
};

double failure_rate_param(const OperatorConfig& cfg, double fallback) {
  double rate = cfg.param<double>("max_failure_rate", fallback);
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw Error(Errc::kInvalidConfig, "max_failure_rate must lie in [0, 1]");
  }
  return rate;
}

OperatorDescriptor text_refiner(std::string name, std::string description) {
  OperatorDescriptor d;
  d.name = std::move(name);
  d.category = Category::kRefine;
  d.input_roles = {{"input_key", Kind::kText}};
  d.output_roles = {{"output_key", Kind::kText, /*in_place=*/true}};
  d.description = std::move(description);
  return d;
}

}  // namespace

void register_core_operators(OperatorRegistry& registry) {
  registry.add(text_refiner("UrlRefiner", "Removes http(s) URLs from a text column."),
               [](const OperatorDescriptor&, const OperatorConfig&) {
                 return std::make_unique<TextRewriteRefiner>(
                     [](std::string_view t) { return remove_urls(t); });
               });

  registry.add(
      text_refiner("CodepointClassRefiner",
                   "Removes codepoints in configured classes (default: emoji) or ranges."),
      [](const OperatorDescriptor&, const OperatorConfig& cfg) {
        auto ranges = ranges_from_config(cfg);
        return std::make_unique<TextRewriteRefiner>(
            [ranges](std::string_view t) { return remove_codepoints(t, ranges); });
      });

  {
    OperatorDescriptor d;
    d.name = "ExactDedupFilter";
    d.category = Category::kFilter;
    d.input_roles = {{"input_keys", std::nullopt, true, /*variadic=*/true}};
    d.output_roles = {{"output_digest", Kind::kText, false, /*optional=*/true}};
    d.description = "Keeps the first row of each distinct key tuple.";
    registry.add(std::move(d), [](const OperatorDescriptor&, const OperatorConfig&) {
      return std::make_unique<ExactDedupFilter>();
    });
  }
  {
    OperatorDescriptor d;
    d.name = "LengthSampleEvaluator";
    d.category = Category::kEvaluateSample;
    d.input_roles = {{"input_key", Kind::kText}};
    d.output_roles = {{"output_key", Kind::kNumber}};
    d.description = "Counts Unicode scalar values per row.";
    registry.add(std::move(d), [](const OperatorDescriptor&, const OperatorConfig&) {
      return std::make_unique<LengthSampleEvaluator>();
    });
  }
  {
    OperatorDescriptor d;
    d.name = "ScoreThresholdFilter";
    d.category = Category::kFilter;
    d.input_roles = {{"input_score", Kind::kNumber}};
    d.output_roles = {{"output_passed", Kind::kBoolean, false, /*optional=*/true}};
    d.description = "Keeps rows whose score lies within [minimum, maximum].";
    registry.add(std::move(d), [](const OperatorDescriptor&, const OperatorConfig& cfg) {
      ScoreThresholdConfig t;
      t.minimum = cfg.param<double>("minimum", 0.0);
      if (cfg.params.contains("maximum") && !cfg.params["maximum"].is_null()) {
        t.maximum = cfg.param<double>("maximum", 0.0);
      }
      t.keep_on_equal = cfg.param<bool>("keep_on_equal", true);
      return std::make_unique<ScoreThresholdFilter>(t);
    });
  }
  {
    OperatorDescriptor d;
    d.name = "TextStatsDatasetEvaluator";
    d.category = Category::kEvaluateDataset;
    d.input_roles = {{"input_key", Kind::kText}};
    d.description = "Length and distinctness statistics of a text column.";
    registry.add(std::move(d), [](const OperatorDescriptor&, const OperatorConfig&) {
      return std::make_unique<TextStatsDatasetEvaluator>();
    });
  }
  {
    OperatorDescriptor d;
    d.name = "AnswerGenerator";
    d.category = Category::kGenerateField;
    d.input_roles = {{"input_question", Kind::kText}};
    d.output_roles = {{"output_answer", Kind::kText}};
    d.allowed_prompt_templates = {"qa_answer"};
    d.requires_serving = true;
    d.description = "Answers each question with one model call.";
    registry.add(std::move(d), [](const OperatorDescriptor& desc, const OperatorConfig& cfg) {
      return std::make_unique<AnswerGenerator>(
          detail::configured_template(desc, cfg),
          failure_rate_param(cfg, kDefaultMaxFailureRate));
    });
  }
  {
    OperatorDescriptor d;
    d.name = "QualityScoreSampleEvaluator";
    d.category = Category::kEvaluateSample;
    d.input_roles = {{"input_key", Kind::kText}};
    d.output_roles = {{"output_score", Kind::kNumber}};
    d.allowed_prompt_templates = {"quality_score"};
    d.requires_serving = true;
    d.description = "Asks a model for a 1 to 5 quality score per text.";
    registry.add(std::move(d), [](const OperatorDescriptor& desc, const OperatorConfig& cfg) {
      return std::make_unique<QualityScoreSampleEvaluator>(
          detail::configured_template(desc, cfg),
          failure_rate_param(cfg, kDefaultMaxFailureRate));
    });
  }
  {
    OperatorDescriptor d;
    d.name = "VariantRowGenerator";
    d.category = Category::kGenerateRows;
    d.input_roles = {{"input_key", Kind::kText}};
    d.output_roles = {{"output_parent_index", Kind::kNumber}};
    d.allowed_prompt_templates = {"variant_rewrite"};
    d.requires_serving = true;
    d.description = "Adds up to m rewritten variants per row, linked by parent index.";
    registry.add(std::move(d), [](const OperatorDescriptor& desc, const OperatorConfig& cfg) {
      int m = cfg.param<int>("variants_per_row", 1);
      if (m < 1) throw Error(Errc::kInvalidConfig, "variants_per_row must be at least 1");
      return std::make_unique<VariantRowGenerator>(detail::configured_template(desc, cfg), m,
                                                   failure_rate_param(cfg, 1.0));
    });
  }
}

}  // namespace dataprep
