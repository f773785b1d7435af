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

#include <sqlite3.h>

#include <algorithm>
#include <chrono>

#include "dataprep/text2sql.hpp"
#include "dataprep/text_util.hpp"

namespace dataprep {

namespace assets {
std::string_view sample_database_script();
}  // namespace assets

namespace {

// Results larger than this are reported as runtime failures rather than
// materialised.
constexpr std::size_t kMaxResultRows = 200000;

std::string quote_ident(std::string_view name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

int progress_deadline(void* arg) {
  auto* deadline = static_cast<std::chrono::steady_clock::time_point*>(arg);
  return std::chrono::steady_clock::now() > *deadline ? 1 : 0;
}

Json column_value(sqlite3_stmt* stmt, int i) {
  switch (sqlite3_column_type(stmt, i)) {
    case SQLITE_INTEGER:
      return Json(static_cast<std::int64_t>(sqlite3_column_int64(stmt, i)));
    case SQLITE_FLOAT:
      return Json(sqlite3_column_double(stmt, i));
    case SQLITE_TEXT:
      return Json(std::string(reinterpret_cast<const char*>(sqlite3_column_text(stmt, i)),
                              static_cast<std::size_t>(sqlite3_column_bytes(stmt, i))));
    case SQLITE_BLOB: {
      static const char* hex = "0123456789abcdef";
      const auto* p = static_cast<const unsigned char*>(sqlite3_column_blob(stmt, i));
      int n = sqlite3_column_bytes(stmt, i);
      std::string out = "x'";
      for (int k = 0; k < n; ++k) {
        out += hex[p[k] >> 4];
        out += hex[p[k] & 0xF];
      }
      return Json(out + "'");
    }
    default:
      return Json(nullptr);
  }
}

bool is_syntax_message(std::string_view msg) {
  return msg.find("syntax error") != std::string_view::npos ||
         msg.find("incomplete input") != std::string_view::npos ||
         msg.find("unrecognized token") != std::string_view::npos;
}

struct StmtGuard {
  sqlite3_stmt* stmt = nullptr;
  ~StmtGuard() { sqlite3_finalize(stmt); }
};

std::string normalise(const Json& cell) {
  if (cell.is_number()) return Json(cell.get<double>()).dump();
  if (cell.is_string()) return Json(std::string(trim(cell.get<std::string>()))).dump();
  return cell.dump();
}

std::string render_value(const Json& v) {
  if (!v.is_string()) return v.dump();
  std::string out = "'";
  for (char c : v.get<std::string>()) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

}  // namespace

std::string_view to_string(SqlFailure f) {
  switch (f) {
    case SqlFailure::kSyntax: return "syntax";
    case SqlFailure::kRuntime: return "runtime";
    case SqlFailure::kTimeout: return "timeout";
  }
  return "?";
}

std::string SchemaInfo::render() const {
  std::string out;
  for (const auto& t : tables) {
    out += t.create_sql;
    out += ";\n";
    for (const auto& c : t.columns) {
      if (c.samples.empty()) continue;
      out += "-- " + t.name + "." + c.name + " examples: ";
      for (std::size_t i = 0; i < c.samples.size(); ++i) {
        if (i > 0) out += ", ";
        out += render_value(c.samples[i]);
      }
      out += '\n';
    }
    out += '\n';
  }
  if (!out.empty()) out.pop_back();
  return out;
}

Json SchemaInfo::to_json() const {
  Json tables_json = Json::array();
  for (const auto& t : tables) {
    Json cols = Json::array();
    for (const auto& c : t.columns) {
      cols.push_back({{"name", c.name}, {"type", c.declared_type}, {"samples", c.samples}});
    }
    tables_json.push_back({{"name", t.name}, {"create_sql", t.create_sql}, {"columns", cols}});
  }
  return {{"dialect", dialect}, {"tables", std::move(tables_json)}};
}

bool same_result(const ResultSet& a, const ResultSet& b) {
  if (a.columns.size() != b.columns.size() || a.rows.size() != b.rows.size()) return false;
  auto keys = [](const ResultSet& r) {
    std::vector<std::string> out;
    out.reserve(r.rows.size());
    for (const auto& row : r.rows) {
      std::string key;
      for (const auto& cell : row) {
        key += normalise(cell);
        key += '\x1f';
      }
      out.push_back(std::move(key));
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  return keys(a) == keys(b);
}

std::shared_ptr<SqliteConnector> SqliteConnector::connect(const std::filesystem::path& location,
                                                          bool read_only) {
  if (read_only && !std::filesystem::exists(location)) {
    throw Error(Errc::kConnection, "database " + location.string() + " does not exist");
  }
  sqlite3* db = nullptr;
  int flags = read_only ? SQLITE_OPEN_READONLY : (SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
  int rc = sqlite3_open_v2(location.string().c_str(), &db, flags, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : "out of memory";
    sqlite3_close(db);
    throw Error(Errc::kConnection, "cannot open " + location.string() + ": " + msg);
  }
  return std::shared_ptr<SqliteConnector>(new SqliteConnector(db));
}

std::shared_ptr<SqliteConnector> SqliteConnector::from_script(std::string_view script) {
  sqlite3* db = nullptr;
  if (sqlite3_open(":memory:", &db) != SQLITE_OK) {
    sqlite3_close(db);
    throw Error(Errc::kConnection, "cannot open an in-memory database");
  }
  char* err = nullptr;
  std::string text(script);
  if (sqlite3_exec(db, text.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    sqlite3_close(db);
    throw Error(Errc::kInvalidArgument, "database script failed: " + msg);
  }
  return std::shared_ptr<SqliteConnector>(new SqliteConnector(db));
}

SqliteConnector::~SqliteConnector() { close(); }

void SqliteConnector::close() {
  std::lock_guard lock(mu_);
  if (db_ != nullptr) {
    sqlite3_close(db_);
    db_ = nullptr;
  }
}

ExecOutcome SqliteConnector::execute_sql(std::string_view sql,
                                         std::chrono::milliseconds timeout) {
  std::lock_guard lock(mu_);
  if (db_ == nullptr) throw Error(Errc::kConnection, "connection is closed");
  ExecOutcome out;
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&](std::optional<SqlFailure> failure, std::string error) {
    sqlite3_progress_handler(db_, 0, nullptr, nullptr);
    out.failure = failure;
    out.error = std::move(error);
    out.elapsed = std::chrono::steady_clock::now() - start;
    if (failure) out.result.reset();
    return out;
  };

  std::string text(trim(sql));
  StmtGuard g;
  const char* tail = nullptr;
  int rc = sqlite3_prepare_v2(db_, text.c_str(), static_cast<int>(text.size()), &g.stmt, &tail);
  if (rc != SQLITE_OK) {
    std::string msg = sqlite3_errmsg(db_);
    return finish(is_syntax_message(msg) ? SqlFailure::kSyntax : SqlFailure::kRuntime, msg);
  }
  if (g.stmt == nullptr) return finish(SqlFailure::kSyntax, "empty statement");
  for (const char* p = tail; p != nullptr && *p != '\0'; ++p) {
    if (*p != ';' && !std::isspace(static_cast<unsigned char>(*p))) {
      return finish(SqlFailure::kRuntime, "only a single statement may be executed");
    }
  }
  if (!sqlite3_stmt_readonly(g.stmt)) {
    return finish(SqlFailure::kRuntime, "statement would modify the database");
  }

  auto deadline = start + timeout;
  sqlite3_progress_handler(db_, 1000, progress_deadline, &deadline);
  ResultSet result;
  const int ncols = sqlite3_column_count(g.stmt);
  for (int i = 0; i < ncols; ++i) {
    const char* name = sqlite3_column_name(g.stmt, i);
    result.columns.emplace_back(name ? name : "");
  }
  for (;;) {
    rc = sqlite3_step(g.stmt);
    if (rc == SQLITE_ROW) {
      if (result.rows.size() >= kMaxResultRows) {
        return finish(SqlFailure::kRuntime, "result exceeds the row limit");
      }
      std::vector<Json> row;
      row.reserve(static_cast<std::size_t>(ncols));
      for (int i = 0; i < ncols; ++i) row.push_back(column_value(g.stmt, i));
      result.rows.push_back(std::move(row));
      continue;
    }
    if (rc == SQLITE_DONE) break;
    if (rc == SQLITE_INTERRUPT) {
      return finish(SqlFailure::kTimeout,
                    "exceeded " + std::to_string(timeout.count()) + " ms");
    }
    return finish(SqlFailure::kRuntime, sqlite3_errmsg(db_));
  }
  out.result = std::move(result);
  return finish(std::nullopt, "");
}

SchemaInfo SqliteConnector::get_schema(std::size_t sample_size) {
  std::lock_guard lock(mu_);
  if (db_ == nullptr) throw Error(Errc::kConnection, "connection is closed");
  auto query = [&](const std::string& sql) {
    StmtGuard g;
    if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &g.stmt, nullptr) != SQLITE_OK) {
      throw Error(Errc::kConnection, std::string("schema query failed: ") + sqlite3_errmsg(db_));
    }
    std::vector<std::vector<Json>> rows;
    int rc;
    while ((rc = sqlite3_step(g.stmt)) == SQLITE_ROW) {
      std::vector<Json> row;
      for (int i = 0; i < sqlite3_column_count(g.stmt); ++i) row.push_back(column_value(g.stmt, i));
      rows.push_back(std::move(row));
    }
    if (rc != SQLITE_DONE) {
      throw Error(Errc::kConnection, std::string("schema query failed: ") + sqlite3_errmsg(db_));
    }
    return rows;
  };

  SchemaInfo info;
  info.dialect = "sqlite";
  auto tables = query(
      "SELECT name, sql FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' "
      "ORDER BY rowid");
  for (const auto& t : tables) {
    TableSchema ts;
    ts.name = t[0].get<std::string>();
    ts.create_sql = t[1].is_string() ? t[1].get<std::string>() : "";
    for (const auto& c : query("PRAGMA table_info(" + quote_ident(ts.name) + ")")) {
      ColumnSchema cs;
      cs.name = c[1].get<std::string>();
      cs.declared_type = c[2].is_string() ? c[2].get<std::string>() : "";
      if (sample_size > 0) {
        for (auto& v : query("SELECT DISTINCT " + quote_ident(cs.name) + " FROM " +
                             quote_ident(ts.name) + " WHERE " + quote_ident(cs.name) +
                             " IS NOT NULL LIMIT " + std::to_string(sample_size))) {
          cs.samples.push_back(std::move(v[0]));
        }
      }
      ts.columns.push_back(std::move(cs));
    }
    info.tables.push_back(std::move(ts));
  }
  return info;
}

std::string_view sample_database_script() { return assets::sample_database_script(); }

std::shared_ptr<SqliteConnector> sample_database() {
  return SqliteConnector::from_script(sample_database_script());
}

std::shared_ptr<DatabaseConnector> open_database(const Json& spec,
                                                 const std::filesystem::path& base_dir) {
  if (!spec.is_object() || !spec.contains("location") || !spec["location"].is_string()) {
    throw Error(Errc::kInvalidConfig, "database resource needs a 'location'");
  }
  auto dialect = spec.value("dialect", std::string("sqlite"));
  if (dialect != "sqlite") {
    throw Error(Errc::kInvalidConfig, "no connector for dialect '" + dialect + "'");
  }
  auto location = spec["location"].get<std::string>();
  if (location == "sample:") return sample_database();
  std::filesystem::path p(location);
  return SqliteConnector::connect(p.is_absolute() ? p : base_dir / p);
}

}  // namespace dataprep
