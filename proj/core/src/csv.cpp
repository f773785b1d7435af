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

// RFC-4180 CSV codec with a JSON sidecar manifest recording column kinds.
//
// Cells are written unquoted when possible. A null cell is an empty unquoted
// field and an empty text cell is a quoted empty field (""), so the manifest
// reader can tell them apart.

#include <set>
#include <sstream>

#include "dataprep/errors.hpp"
#include "dataprep/storage.hpp"

namespace dataprep {
namespace {

struct CsvField {
  std::string text;
  bool quoted = false;
};

std::vector<std::vector<CsvField>> tokenize(std::string_view bytes) {
  std::vector<std::vector<CsvField>> records;
  std::vector<CsvField> record;
  CsvField field;
  std::size_t line = 1;
  std::size_t i = 0;
  bool field_started = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field = CsvField{};
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };

  while (i < bytes.size()) {
    char c = bytes[i];
    if (!field_started && c == '"') {
      field.quoted = true;
      field_started = true;
      std::size_t start_line = line;
      ++i;
      while (true) {
        if (i >= bytes.size()) {
          throw Error(Errc::kMalformed,
                      "csv: unterminated quoted field starting on line " +
                          std::to_string(start_line));
        }
        char q = bytes[i];
        if (q == '"') {
          if (i + 1 < bytes.size() && bytes[i + 1] == '"') {
            field.text.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (q == '\n') ++line;
        field.text.push_back(q);
        ++i;
      }
      if (i < bytes.size() && bytes[i] != ',' && bytes[i] != '\n' &&
          bytes[i] != '\r') {
        throw Error(Errc::kMalformed,
                    "csv: unexpected character after closing quote on line " +
                        std::to_string(line) + " (byte offset " +
                        std::to_string(i) + ")");
      }
      continue;
    }
    if (c == ',') {
      end_field();
      ++i;
      continue;
    }
    if (c == '\r' || c == '\n') {
      end_record();
      if (c == '\r' && i + 1 < bytes.size() && bytes[i + 1] == '\n') ++i;
      ++i;
      ++line;
      continue;
    }
    if (c == '"') {
      throw Error(Errc::kMalformed, "csv: stray quote inside unquoted field on line " +
                                        std::to_string(line) + " (byte offset " +
                                        std::to_string(i) + ")");
    }
    field_started = true;
    field.text.push_back(c);
    ++i;
  }
  if (field_started || !record.empty()) end_record();
  return records;
}

bool needs_quotes(std::string_view text) {
  if (text.empty()) return true;
  for (char c : text) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') return true;
  }
  return text.front() == ' ' || text.back() == ' ';
}

void write_field(std::string& out, std::string_view text, bool force_quote) {
  if (!force_quote && !needs_quotes(text)) {
    out.append(text);
    return;
  }
  out.push_back('"');
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

FieldValue decode_cell(const CsvField& f, std::optional<Kind> kind,
                       bool has_manifest, std::size_t line,
                       const std::string& column) {
  if (!has_manifest) return FieldValue::text(f.text);
  if (f.text.empty() && !f.quoted) return FieldValue::null();
  auto fail = [&](const std::string& why) -> Error {
    return Error(Errc::kMalformed, "csv: record " + std::to_string(line) +
                                       ", column '" + column + "': " + why);
  };
  if (kind == Kind::kText) return FieldValue::text(f.text);
  Json parsed = Json::parse(f.text, nullptr, false);
  if (parsed.is_discarded()) throw fail("cell is not valid for its declared kind");
  if (!kind) return FieldValue(std::move(parsed));  // mixed
  FieldValue v(std::move(parsed));
  if (v.kind() != *kind) {
    throw fail("expected " + std::string(to_string(*kind)) + ", found " +
               std::string(to_string(v.kind())));
  }
  return v;
}

}  // namespace

Dataset parse_csv(std::string_view bytes, const std::optional<CsvManifest>& manifest) {
  auto records = tokenize(bytes);
  if (records.empty()) return Dataset{};
  std::vector<std::string> header;
  std::set<std::string> seen;
  for (const auto& f : records.front()) {
    if (f.text.empty()) throw Error(Errc::kMalformed, "csv: empty column name in header");
    if (!seen.insert(f.text).second) {
      throw Error(Errc::kMalformed, "csv: duplicate column name '" + f.text + "' in header");
    }
    header.push_back(f.text);
  }
  std::vector<std::optional<Kind>> kinds(header.size(), Kind::kText);
  if (manifest) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      for (const auto& [name, kind] : manifest->columns) {
        if (name == header[c]) kinds[c] = kind;
      }
    }
  }
  Dataset out(header);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      throw Error(Errc::kMalformed, "csv: record " + std::to_string(r + 1) + " has " +
                                        std::to_string(rec.size()) + " fields, header has " +
                                        std::to_string(header.size()));
    }
    std::vector<FieldValue> cells;
    cells.reserve(rec.size());
    for (std::size_t c = 0; c < rec.size(); ++c) {
      cells.push_back(decode_cell(rec[c], kinds[c], manifest.has_value(), r + 1, header[c]));
    }
    out.append_row(std::move(cells));
  }
  return out;
}

CsvManifest csv_manifest_for(const Dataset& dataset) {
  CsvManifest m;
  for (std::size_t c = 0; c < dataset.column_count(); ++c) {
    std::optional<Kind> found;
    bool mixed = false;
    for (std::size_t r = 0; r < dataset.row_count(); ++r) {
      const auto& v = dataset.at(r, c);
      if (v.is_null()) continue;
      if (found && *found != v.kind()) mixed = true;
      found = v.kind();
    }
    if (mixed) {
      m.columns.emplace_back(dataset.columns()[c], std::nullopt);
    } else {
      m.columns.emplace_back(dataset.columns()[c], found.value_or(Kind::kText));
    }
  }
  return m;
}

std::string to_csv(const Dataset& dataset) {
  if (dataset.column_count() == 0) return {};
  const CsvManifest manifest = csv_manifest_for(dataset);
  std::string out;
  for (std::size_t c = 0; c < dataset.column_count(); ++c) {
    if (c) out.push_back(',');
    write_field(out, dataset.columns()[c], false);
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < dataset.row_count(); ++r) {
    for (std::size_t c = 0; c < dataset.column_count(); ++c) {
      if (c) out.push_back(',');
      const auto& v = dataset.at(r, c);
      if (v.is_null()) continue;
      const bool mixed = !manifest.columns[c].second.has_value();
      if (v.kind() == Kind::kText && !mixed) {
        write_field(out, v.as_text(), false);
      } else {
        write_field(out, v.json().dump(), false);
      }
    }
    out.push_back('\n');
  }
  return out;
}

Json manifest_to_json(const CsvManifest& manifest) {
  Json cols = Json::object();
  for (const auto& [name, kind] : manifest.columns) {
    cols[name] = kind ? std::string(to_string(*kind)) : std::string("mixed");
  }
  return Json{{"columns", cols}};
}

CsvManifest manifest_from_json(const Json& json) {
  CsvManifest m;
  if (!json.is_object() || !json.contains("columns") || !json["columns"].is_object()) {
    throw Error(Errc::kMalformed, "csv manifest: expected {\"columns\": {...}}");
  }
  for (const auto& [name, kind] : json["columns"].items()) {
    if (!kind.is_string()) throw Error(Errc::kMalformed, "csv manifest: kind must be text");
    const auto& s = kind.get_ref<const std::string&>();
    if (s == "mixed") {
      m.columns.emplace_back(name, std::nullopt);
      continue;
    }
    auto k = parse_kind(s);
    if (!k) throw Error(Errc::kMalformed, "csv manifest: unknown kind '" + s + "'");
    m.columns.emplace_back(name, *k);
  }
  return m;
}

std::filesystem::path csv_manifest_path(const std::filesystem::path& csv) {
  return std::filesystem::path(csv.string() + ".manifest.json");
}

}  // namespace dataprep
