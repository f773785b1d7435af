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

#include "dataprep/value.hpp"

#include <algorithm>

#include "dataprep/errors.hpp"

namespace dataprep {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kIo: return "io";
    case Errc::kMalformed: return "malformed";
    case Errc::kUnsupportedFormat: return "unsupported-format";
    case Errc::kMissingColumn: return "missing-column";
    case Errc::kLengthMismatch: return "length-mismatch";
    case Errc::kConcurrentWriter: return "concurrent-writer";
    case Errc::kPersistence: return "persistence";
    case Errc::kMissingSnapshot: return "missing-snapshot";
    case Errc::kDigestMismatch: return "digest-mismatch";
    case Errc::kInvalidConfig: return "invalid-config";
    case Errc::kMissingCredential: return "missing-credential";
    case Errc::kParse: return "parse";
    case Errc::kConformance: return "conformance";
    case Errc::kBatchAborted: return "batch-aborted";
    case Errc::kDuplicateName: return "duplicate-name";
    case Errc::kNamingViolation: return "naming-violation";
    case Errc::kInvalidDescriptor: return "invalid-descriptor";
    case Errc::kBindingIncomplete: return "binding-incomplete";
    case Errc::kKindMismatch: return "kind-mismatch";
    case Errc::kServingMismatch: return "serving-mismatch";
    case Errc::kOperatorFailure: return "operator-failure";
    case Errc::kCategoryLaw: return "category-law";
    case Errc::kMissingSlot: return "missing-slot";
    case Errc::kUnknownSlot: return "unknown-slot";
    case Errc::kInvalidTemplate: return "invalid-template";
    case Errc::kIncompatibleTemplate: return "incompatible-template";
    case Errc::kUnknownTemplate: return "unknown-template";
    case Errc::kUnknownOperator: return "unknown-operator";
    case Errc::kPlanDigestMismatch: return "plan-digest-mismatch";
    case Errc::kConnection: return "connection";
    case Errc::kInvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

namespace {

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

MissingColumnError::MissingColumnError(std::string column,
                                       std::vector<std::string> available)
    : Error(Errc::kMissingColumn,
            "missing column '" + column + "' (available: {" + join(available) +
                "})"),
      column_(std::move(column)),
      available_(std::move(available)) {}

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::kText: return "text";
    case Kind::kNumber: return "number";
    case Kind::kBoolean: return "boolean";
    case Kind::kSequence: return "sequence";
    case Kind::kObject: return "object";
    case Kind::kNull: return "null";
  }
  return "null";
}

std::optional<Kind> parse_kind(std::string_view name) {
  for (Kind k : {Kind::kText, Kind::kNumber, Kind::kBoolean, Kind::kSequence,
                 Kind::kObject, Kind::kNull}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

FieldValue::FieldValue(Json value) : value_(std::move(value)) {
  if (value_.is_binary() || value_.is_discarded()) {
    throw Error(Errc::kKindMismatch, "unsupported JSON value for a field");
  }
}

FieldValue FieldValue::text(std::string value) {
  return FieldValue(Json(std::move(value)));
}
FieldValue FieldValue::number(double value) { return FieldValue(Json(value)); }
FieldValue FieldValue::integer(std::int64_t value) {
  return FieldValue(Json(value));
}
FieldValue FieldValue::boolean(bool value) { return FieldValue(Json(value)); }

Kind FieldValue::kind() const {
  if (value_.is_string()) return Kind::kText;
  if (value_.is_number()) return Kind::kNumber;
  if (value_.is_boolean()) return Kind::kBoolean;
  if (value_.is_array()) return Kind::kSequence;
  if (value_.is_object()) return Kind::kObject;
  return Kind::kNull;
}

const std::string& FieldValue::as_text() const {
  if (!value_.is_string()) {
    throw Error(Errc::kKindMismatch, "expected text, found " +
                                         std::string(to_string(kind())));
  }
  return value_.get_ref<const std::string&>();
}

double FieldValue::as_number() const {
  if (!value_.is_number()) {
    throw Error(Errc::kKindMismatch, "expected number, found " +
                                         std::string(to_string(kind())));
  }
  return value_.get<double>();
}

bool FieldValue::as_bool() const {
  if (!value_.is_boolean()) {
    throw Error(Errc::kKindMismatch, "expected boolean, found " +
                                         std::string(to_string(kind())));
  }
  return value_.get<bool>();
}

Dataset::Dataset(std::vector<std::string> columns) {
  for (auto& c : columns) add_column(c);
}

bool Dataset::has_column(std::string_view name) const {
  return index_.find(std::string(name)) != index_.end();
}

std::optional<std::size_t> Dataset::column_index(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const FieldValue& Dataset::at(std::size_t row, std::string_view column) const {
  auto idx = column_index(column);
  if (!idx) throw MissingColumnError(std::string(column), columns_);
  return rows_.at(row).at(*idx);
}

void Dataset::set(std::size_t row, std::string_view column, FieldValue value) {
  auto idx = column_index(column);
  if (!idx) throw MissingColumnError(std::string(column), columns_);
  rows_.at(row).at(*idx) = std::move(value);
}

std::size_t Dataset::add_column(const std::string& name) {
  if (name.empty()) {
    throw Error(Errc::kInvalidArgument, "column names must be non-empty");
  }
  if (auto idx = column_index(name)) return *idx;
  columns_.push_back(name);
  index_.emplace(name, columns_.size() - 1);
  for (auto& r : rows_) r.emplace_back();
  return columns_.size() - 1;
}

void Dataset::append_row(const Row& row) {
  for (const auto& [name, _] : row) add_column(name);
  std::vector<FieldValue> cells(columns_.size());
  for (const auto& [name, value] : row) cells[index_.at(name)] = value;
  rows_.push_back(std::move(cells));
}

void Dataset::append_row(std::vector<FieldValue> cells) {
  if (cells.size() > columns_.size()) {
    throw Error(Errc::kLengthMismatch, "row has more cells than columns");
  }
  cells.resize(columns_.size());
  rows_.push_back(std::move(cells));
}

std::vector<FieldValue> Dataset::column_values(std::string_view column) const {
  auto idx = column_index(column);
  if (!idx) throw MissingColumnError(std::string(column), columns_);
  std::vector<FieldValue> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r[*idx]);
  return out;
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& indices) const {
  Dataset out(columns_);
  out.provenance_ = provenance_;
  out.rows_.reserve(indices.size());
  for (std::size_t i : indices) out.rows_.push_back(rows_.at(i));
  return out;
}

Dataset Dataset::project(const std::vector<std::string>& columns) const {
  std::vector<std::size_t> idx;
  for (const auto& c : columns) {
    auto i = column_index(c);
    if (!i) throw MissingColumnError(c, columns_);
    idx.push_back(*i);
  }
  Dataset out(columns);
  out.provenance_ = provenance_;
  out.rows_.reserve(rows_.size());
  for (const auto& r : rows_) {
    std::vector<FieldValue> cells;
    cells.reserve(idx.size());
    for (std::size_t i : idx) cells.push_back(r[i]);
    out.rows_.push_back(std::move(cells));
  }
  return out;
}

Json Dataset::row_json(std::size_t index) const {
  Json obj = Json::object();
  const auto& r = rows_.at(index);
  for (std::size_t c = 0; c < columns_.size(); ++c) obj[columns_[c]] = r[c].json();
  return obj;
}

}  // namespace dataprep
