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

#ifndef DATAPREP_VALUE_HPP_
#define DATAPREP_VALUE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace dataprep {

using Json = nlohmann::ordered_json;

/// The six value kinds a dataset cell may hold.
enum class Kind { kText, kNumber, kBoolean, kSequence, kObject, kNull };

std::string_view to_string(Kind kind);
std::optional<Kind> parse_kind(std::string_view name);

/// A kind-tagged cell value. The kind is always derived from the payload, so
/// the two cannot disagree.
class FieldValue {
 public:
  FieldValue() = default;
  explicit FieldValue(Json value);

  static FieldValue text(std::string value);
  static FieldValue number(double value);
  static FieldValue integer(std::int64_t value);
  static FieldValue boolean(bool value);
  static FieldValue null() { return FieldValue(); }

  Kind kind() const;
  bool is_null() const { return value_.is_null(); }

  /// Accessors throw Error(kKindMismatch) on the wrong kind.
  const std::string& as_text() const;
  double as_number() const;
  bool as_bool() const;

  const Json& json() const { return value_; }

  friend bool operator==(const FieldValue& a, const FieldValue& b) {
    return a.value_ == b.value_;
  }

 private:
  Json value_;
};

/// A row as written by operators: column name -> value, in insertion order.
using Row = std::vector<std::pair<std::string, FieldValue>>;

/// Ordered rows over an ordered set of unique, non-empty column names. Every
/// row is kept padded to the column count, so an absent cell reads as null.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t row_count() const { return rows_.size(); }
  std::size_t column_count() const { return columns_.size(); }
  bool empty() const { return rows_.empty(); }

  bool has_column(std::string_view name) const;
  std::optional<std::size_t> column_index(std::string_view name) const;

  /// Throws MissingColumnError when `column` is unknown.
  const FieldValue& at(std::size_t row, std::string_view column) const;
  const FieldValue& at(std::size_t row, std::size_t column) const {
    return rows_.at(row).at(column);
  }
  void set(std::size_t row, std::string_view column, FieldValue value);

  /// Adds a column of nulls; no-op if it already exists.
  std::size_t add_column(const std::string& name);
  /// Appends a row; unknown keys introduce new columns.
  void append_row(const Row& row);
  void append_row(std::vector<FieldValue> cells);

  std::vector<FieldValue> column_values(std::string_view column) const;
  const std::vector<FieldValue>& row(std::size_t index) const {
    return rows_.at(index);
  }

  /// Keeps only the rows whose index is listed, in the listed order.
  Dataset select_rows(const std::vector<std::size_t>& indices) const;
  /// Restricts to `columns`; throws MissingColumnError for unknown names.
  Dataset project(const std::vector<std::string>& columns) const;

  Json row_json(std::size_t index) const;

  const std::optional<std::string>& provenance() const { return provenance_; }
  void set_provenance(std::string location) {
    provenance_ = std::move(location);
  }

  /// Provenance is metadata and does not take part in equality.
  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.columns_ == b.columns_ && a.rows_ == b.rows_;
  }

 private:
  std::vector<std::string> columns_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<FieldValue>> rows_;
  std::optional<std::string> provenance_;
};

}  // namespace dataprep

#endif  // DATAPREP_VALUE_HPP_
