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
#include <cctype>
#include <regex>

#include "dataprep/sql.hpp"
#include "dataprep/text_util.hpp"

namespace dataprep::sql {
namespace {

struct Token {
  enum Type { kWord, kPunct, kLiteral } type;
  std::string text;     // uppercased for words
  bool quoted = false;  // quoted identifiers never act as keywords
};

bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

std::optional<std::vector<Token>> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '-') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      auto end = s.find("*/", i + 2);
      if (end == std::string_view::npos) return std::nullopt;
      i = end + 2;
    } else if (c == '\'') {
      std::size_t j = i + 1;
      for (;;) {
        if (j >= s.size()) return std::nullopt;
        if (s[j] == '\'') {
          if (j + 1 < s.size() && s[j + 1] == '\'') {
            j += 2;
            continue;
          }
          break;
        }
        ++j;
      }
      out.push_back({Token::kLiteral, std::string(s.substr(i, j + 1 - i))});
      i = j + 1;
    } else if (c == '"' || c == '`' || c == '[') {
      const char close = c == '[' ? ']' : static_cast<char>(c);
      auto end = s.find(close, i + 1);
      if (end == std::string_view::npos) return std::nullopt;
      out.push_back({Token::kWord, std::string(s.substr(i + 1, end - i - 1)), true});
      i = end + 1;
    } else if (std::isdigit(c)) {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      out.push_back({Token::kLiteral, std::string(s.substr(i, j - i))});
      i = j;
    } else if (ident_char(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(static_cast<unsigned char>(s[j]))) ++j;
      std::string w(s.substr(i, j - i));
      for (auto& ch : w) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      out.push_back({Token::kWord, std::move(w)});
      i = j;
    } else {
      out.push_back({Token::kPunct, std::string(1, static_cast<char>(c))});
      ++i;
    }
  }
  return out;
}

bool is_kw(const Token& t, std::string_view kw) {
  return t.type == Token::kWord && !t.quoted && t.text == kw;
}
bool is_punct(const Token& t, char p) { return t.type == Token::kPunct && t.text[0] == p; }

bool is_aggregate(const Token& t) {
  return is_kw(t, "COUNT") || is_kw(t, "SUM") || is_kw(t, "AVG") || is_kw(t, "MIN") ||
         is_kw(t, "MAX");
}

}  // namespace

std::string_view to_string(GenComplexity c) {
  switch (c) {
    case GenComplexity::kSimple: return "simple";
    case GenComplexity::kModerate: return "moderate";
    case GenComplexity::kComplex: return "complex";
    case GenComplexity::kHighlyComplex: return "highly complex";
  }
  return "?";
}

std::string_view to_string(ComponentDifficulty d) {
  switch (d) {
    case ComponentDifficulty::kSimple: return "simple";
    case ComponentDifficulty::kModerate: return "moderate";
    case ComponentDifficulty::kHard: return "hard";
    case ComponentDifficulty::kExtraHard: return "extra hard";
  }
  return "?";
}

std::optional<ComponentDifficulty> parse_component_difficulty(std::string_view name) {
  for (auto d : {ComponentDifficulty::kSimple, ComponentDifficulty::kModerate,
                 ComponentDifficulty::kHard, ComponentDifficulty::kExtraHard}) {
    if (to_string(d) == name) return d;
  }
  return std::nullopt;
}

std::string_view to_string(AugmentationStrategy s) {
  switch (s) {
    case AugmentationStrategy::kDataValueTransformation: return "data_value_transformation";
    case AugmentationStrategy::kQueryStructureModification: return "query_structure_modification";
    case AugmentationStrategy::kBusinessLogicAlteration: return "business_logic_alteration";
    case AugmentationStrategy::kComplexityEnhancement: return "complexity_enhancement";
    case AugmentationStrategy::kAdvancedFeatureIntroduction: return "advanced_feature_introduction";
    case AugmentationStrategy::kPerformanceAndOptimization: return "performance_and_optimization";
  }
  return "?";
}

std::string_view to_string(QuestionStyle s) {
  switch (s) {
    case QuestionStyle::kFormal: return "formal";
    case QuestionStyle::kColloquial: return "colloquial";
    case QuestionStyle::kImperative: return "imperative";
    case QuestionStyle::kInterrogative: return "interrogative";
    case QuestionStyle::kDeclarative: return "declarative";
    case QuestionStyle::kConcise: return "concise";
    case QuestionStyle::kDescriptive: return "descriptive";
    case QuestionStyle::kAmbiguous: return "ambiguous";
    case QuestionStyle::kMetaphorical: return "metaphorical";
    case QuestionStyle::kRolePlaying: return "role_playing";
    case QuestionStyle::kProcedural: return "procedural";
  }
  return "?";
}

std::string_view to_string(StyleAxis a) {
  switch (a) {
    case StyleAxis::kTone: return "tone";
    case StyleAxis::kIntent: return "intent";
    case StyleAxis::kDensity: return "density";
    case StyleAxis::kInteraction: return "interaction";
  }
  return "?";
}

StyleAxis axis_of(QuestionStyle s) {
  switch (s) {
    case QuestionStyle::kFormal:
    case QuestionStyle::kColloquial:
      return StyleAxis::kTone;
    case QuestionStyle::kImperative:
    case QuestionStyle::kInterrogative:
    case QuestionStyle::kDeclarative:
      return StyleAxis::kIntent;
    case QuestionStyle::kConcise:
    case QuestionStyle::kDescriptive:
    case QuestionStyle::kAmbiguous:
    case QuestionStyle::kMetaphorical:
      return StyleAxis::kDensity;
    case QuestionStyle::kRolePlaying:
    case QuestionStyle::kProcedural:
      return StyleAxis::kInteraction;
  }
  return StyleAxis::kTone;
}

std::string_view complexity_definition(GenComplexity c) {
  switch (c) {
    case GenComplexity::kSimple:
      return "A single-table query with a basic filter and no aggregation, for example:\n"
             "SELECT name FROM singer WHERE country = 'France';";
    case GenComplexity::kModerate:
      return "A query with one join or one aggregation with grouping, for example:\n"
             "SELECT country, COUNT(*) FROM singer GROUP BY country;";
    case GenComplexity::kComplex:
      return "A query combining joins, aggregation and ordering or a subquery, for example:\n"
             "SELECT v.name, COUNT(*) FROM venue v JOIN show s ON s.venue_id = v.venue_id "
             "GROUP BY v.name ORDER BY COUNT(*) DESC;";
    case GenComplexity::kHighlyComplex:
      return "A query with nested subqueries, set operations, window functions or CTEs, for "
             "example:\nWITH c AS (SELECT singer_id, COUNT(*) AS n FROM show GROUP BY singer_id) "
             "SELECT name FROM singer WHERE singer_id IN (SELECT singer_id FROM c WHERE n > 1);";
  }
  return "";
}

const std::vector<std::string>& advanced_function_hints() {
  static const std::vector<std::string> hints = {
      "ROW_NUMBER() OVER (...)", "RANK() OVER (...)",       "DENSE_RANK() OVER (...)",
      "LAG(...) OVER (...)",     "CASE WHEN ... END",       "COALESCE(...)",
      "NULLIF(...)",             "SUBSTR(...)",             "UPPER(...) / LOWER(...)",
      "LENGTH(...)",             "STRFTIME(...)",           "ROUND(...)",
  };
  return hints;
}

std::optional<SqlFeatures> scan(std::string_view sql) {
  auto tokens = tokenize(sql);
  if (!tokens || tokens->empty()) return std::nullopt;
  const auto& t = *tokens;

  std::size_t first = 0;
  while (first < t.size() && is_punct(t[first], '(')) ++first;
  if (first == t.size() || !(is_kw(t[first], "SELECT") || is_kw(t[first], "WITH"))) {
    return std::nullopt;
  }

  SqlFeatures f;
  // Paren stack: true marks a window specification.
  std::vector<bool> parens;
  std::size_t windows = 0;
  std::optional<std::size_t> main_select;
  std::size_t main_depth = 0;

  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& tok = t[i];
    const Token* next = i + 1 < t.size() ? &t[i + 1] : nullptr;
    if (is_punct(tok, '(')) {
      bool window = i > 0 && is_kw(t[i - 1], "OVER");
      bool query = next && (is_kw(*next, "SELECT") || is_kw(*next, "WITH"));
      // A parenthesised operand of a top-level compound query is not nested.
      bool operand = parens.empty() &&
                     (i == 0 || is_kw(t[i - 1], "UNION") || is_kw(t[i - 1], "INTERSECT") ||
                      is_kw(t[i - 1], "EXCEPT") || is_kw(t[i - 1], "ALL"));
      if (query && !operand) ++f.nested_subqueries;
      parens.push_back(window);
      if (window) ++windows;
      continue;
    }
    if (is_punct(tok, ')')) {
      if (parens.empty()) return std::nullopt;
      if (parens.back()) --windows;
      parens.pop_back();
      continue;
    }
    if (is_aggregate(tok) && next && is_punct(*next, '(')) ++f.aggregates;
    if (is_kw(tok, "GROUP") && next && is_kw(*next, "BY")) f.group_by = true;
    if (is_kw(tok, "ORDER") && next && is_kw(*next, "BY") && windows == 0) f.order_by = true;
    if (is_kw(tok, "UNION") || is_kw(tok, "INTERSECT") || is_kw(tok, "EXCEPT")) ++f.set_operators;
    if (is_kw(tok, "JOIN")) ++f.joins;
    if (is_kw(tok, "SELECT") && (!main_select || parens.size() < main_depth)) {
      main_select = i;
      main_depth = parens.size();
    }
  }
  if (!parens.empty() || !main_select) return std::nullopt;

  std::size_t items = 0;
  bool any = false;
  std::size_t depth = 0;
  for (std::size_t i = *main_select + 1; i < t.size(); ++i) {
    const auto& tok = t[i];
    if (is_punct(tok, '(')) {
      ++depth;
    } else if (is_punct(tok, ')')) {
      if (depth == 0) break;
      --depth;
    }
    if (depth == 0) {
      if (is_kw(tok, "FROM") || is_kw(tok, "UNION") || is_kw(tok, "INTERSECT") ||
          is_kw(tok, "EXCEPT") || is_kw(tok, "WHERE") || is_kw(tok, "ORDER") ||
          is_kw(tok, "GROUP") || is_kw(tok, "LIMIT") || is_punct(tok, ';')) {
        break;
      }
      if (!any && (is_kw(tok, "DISTINCT") || is_kw(tok, "ALL"))) continue;
      if (is_punct(tok, ',')) {
        ++items;
        continue;
      }
    }
    any = true;
  }
  if (!any) return std::nullopt;
  f.select_columns = items + 1;
  return f;
}

int ComponentRules::score(const SqlFeatures& f) {
  int s = static_cast<int>(f.aggregates);
  s += f.group_by ? 1 : 0;
  s += f.order_by ? 1 : 0;
  s += 2 * static_cast<int>(f.set_operators);
  s += 2 * static_cast<int>(f.nested_subqueries);
  s += f.joins > 1 ? static_cast<int>(f.joins - 1) : 0;
  s += f.select_columns > 3 ? 1 : 0;
  return s;
}

ComponentDifficulty ComponentRules::classify(const SqlFeatures& f) const {
  int s = score(f);
  if (s >= extra_hard_from) return ComponentDifficulty::kExtraHard;
  if (s >= hard_from) return ComponentDifficulty::kHard;
  if (s >= moderate_from) return ComponentDifficulty::kModerate;
  return ComponentDifficulty::kSimple;
}

ComponentDifficulty ExecutionThresholds::classify(int n, int k) const {
  if (k <= 0 || n < 0 || n > k) {
    throw std::invalid_argument("execution trial counts need 0 <= n <= k and k >= 1");
  }
  if (n == 0) return ComponentDifficulty::kExtraHard;
  // Compare n/k against the bands without floating-point division.
  auto at_least = [&](double band) { return static_cast<double>(n) >= band * k - 1e-9; };
  if (at_least(simple_from)) return ComponentDifficulty::kSimple;
  if (at_least(moderate_from)) return ComponentDifficulty::kModerate;
  return ComponentDifficulty::kHard;
}

std::optional<std::string> extract_sql(std::string_view reply) {
  auto blocks = fenced_blocks(reply);
  const FencedBlock* pick = nullptr;
  for (const auto& b : blocks) {
    if (b.tag.rfind("sql", 0) == 0) pick = &b;
  }
  if (pick == nullptr && !blocks.empty()) pick = &blocks.back();
  if (pick != nullptr) {
    auto body = std::string(trim(pick->body));
    if (!body.empty()) return body;
    return std::nullopt;
  }
  auto is_word_at = [&](std::size_t i, std::string_view kw) {
    if (i + kw.size() > reply.size()) return false;
    for (std::size_t k = 0; k < kw.size(); ++k) {
      if (std::toupper(static_cast<unsigned char>(reply[i + k])) != kw[k]) return false;
    }
    bool left = i == 0 || !ident_char(static_cast<unsigned char>(reply[i - 1]));
    bool right = i + kw.size() == reply.size() ||
                 !ident_char(static_cast<unsigned char>(reply[i + kw.size()]));
    return left && right;
  };
  for (std::size_t i = 0; i < reply.size(); ++i) {
    const bool select = is_word_at(i, "SELECT");
    if (!select && !is_word_at(i, "WITH")) continue;
    auto body = std::string(trim(reply.substr(i)));
    // Prose such as "help with that" is not a statement.
    static const std::regex kSelect(R"(^SELECT\s+\S)", std::regex::icase);
    static const std::regex kCte(
        R"(^WITH\s+(RECURSIVE\s+)?[A-Za-z_"`\[][^\s(]*\s*(\([^)]*\)\s*)?AS\s*(NOT\s+MATERIALIZED\s*|MATERIALIZED\s*)?\()",
        std::regex::icase);
    if (std::regex_search(body, select ? kSelect : kCte)) return body;
  }
  return std::nullopt;
}

}  // namespace dataprep::sql
