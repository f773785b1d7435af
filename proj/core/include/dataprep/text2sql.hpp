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

#ifndef DATAPREP_TEXT2SQL_HPP_
#define DATAPREP_TEXT2SQL_HPP_

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dataprep/operator.hpp"
#include "dataprep/pipeline.hpp"
#include "dataprep/sql.hpp"

struct sqlite3;

namespace dataprep {

struct ColumnSchema {
  std::string name;
  std::string declared_type;
  std::vector<Json> samples;
};

struct TableSchema {
  std::string name;
  std::string create_sql;
  std::vector<ColumnSchema> columns;
};

struct SchemaInfo {
  std::string dialect;
  std::vector<TableSchema> tables;

  /// CREATE statements followed by sample values, as fed to prompts.
  std::string render() const;
  Json to_json() const;
};

enum class SqlFailure { kSyntax, kRuntime, kTimeout };
std::string_view to_string(SqlFailure f);

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
};

struct ExecOutcome {
  std::optional<ResultSet> result;
  std::optional<SqlFailure> failure;
  std::string error;
  std::chrono::nanoseconds elapsed{0};

  bool ok() const { return result.has_value(); }
};

/// Order-insensitive comparison of two results: same column count and equal
/// multisets of rows after normalising cells (integers widen to reals, text
/// is trimmed).
bool same_result(const ResultSet& a, const ResultSet& b);

/// Access to one database. Losing the connection throws Error(kConnection);
/// failures of individual statements come back in the outcome.
class DatabaseConnector {
 public:
  virtual ~DatabaseConnector() = default;
  virtual std::string dialect() const = 0;
  virtual ExecOutcome execute_sql(std::string_view sql, std::chrono::milliseconds timeout) = 0;
  /// At most `sample_size` distinct non-null values per column.
  virtual SchemaInfo get_schema(std::size_t sample_size = 3) = 0;
  virtual void close() = 0;
  /// Whether execute_sql may be called from several threads at once.
  virtual bool concurrency_safe() const { return false; }
};

/// Embedded SQLite connector. Opens read-only by default; calls are
/// serialised internally.
class SqliteConnector final : public DatabaseConnector {
 public:
  static std::shared_ptr<SqliteConnector> connect(const std::filesystem::path& location,
                                                  bool read_only = true);
  /// An in-memory database initialised by `script`.
  static std::shared_ptr<SqliteConnector> from_script(std::string_view script);

  ~SqliteConnector() override;
  SqliteConnector(const SqliteConnector&) = delete;
  SqliteConnector& operator=(const SqliteConnector&) = delete;

  std::string dialect() const override { return "sqlite"; }
  ExecOutcome execute_sql(std::string_view sql, std::chrono::milliseconds timeout) override;
  SchemaInfo get_schema(std::size_t sample_size = 3) override;
  void close() override;

 private:
  explicit SqliteConnector(sqlite3* db) : db_(db) {}
  std::mutex mu_;
  sqlite3* db_;
};

/// The bundled singer/venue/show database as an in-memory connection.
std::shared_ptr<SqliteConnector> sample_database();
/// Its creation script.
std::string_view sample_database_script();

/// Opens the "database" resource described by {location, dialect}.
std::shared_ptr<DatabaseConnector> open_database(const Json& spec,
                                                 const std::filesystem::path& base_dir);

/// The nine Text-to-SQL operators.
void register_text2sql_operators(OperatorRegistry& registry);

struct Text2SqlConfig {
  /// Database file; "sample:" selects the bundled database.
  std::string database = "sample:";
  std::string dialect = "sqlite";
  std::string sql_template = "sql_gen_sqlite";
  BackendConfig serving;
  std::size_t generation_count = 20;
  int exec_k = 8;
  int timeout_ms = 5000;
  bool keep_invalid_cot = false;
  /// Seed question/sql pairs for the refinement pipeline.
  StorageDef seed_storage;

  void validate() const;
};

/// SQLRowGenerator, SQLExecutionFilter, QuestionGenerator, CoTGenerator,
/// PromptGenerator, SQLComponentSampleEvaluator, SQLExecutionSampleEvaluator.
PipelineDef build_generation_pipeline(const Text2SqlConfig& config);
/// SQLExecutionFilter, Text2SQLConsistencyFilter, SQLAugmentRowGenerator,
/// SQLExecutionFilter, then the last five generation stages.
PipelineDef build_refinement_pipeline(const Text2SqlConfig& config);

}  // namespace dataprep

#endif  // DATAPREP_TEXT2SQL_HPP_
