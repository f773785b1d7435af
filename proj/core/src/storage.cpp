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

#include "dataprep/storage.hpp"

#include <unistd.h>

#include <fstream>
#include <sstream>
#include <system_error>

#include "dataprep/digest.hpp"
#include "dataprep/errors.hpp"

namespace dataprep {
namespace fs = std::filesystem;

std::string_view to_string(Format format) {
  switch (format) {
    case Format::kJson: return "json";
    case Format::kJsonl: return "jsonl";
    case Format::kCsv: return "csv";
  }
  return "jsonl";
}

std::optional<Format> parse_format(std::string_view name) {
  if (name == "json") return Format::kJson;
  if (name == "jsonl") return Format::kJsonl;
  if (name == "csv") return Format::kCsv;
  return std::nullopt;
}

namespace {

Row row_from_object(const Json& obj) {
  Row row;
  row.reserve(obj.size());
  for (const auto& [key, value] : obj.items()) {
    if (key.empty()) throw Error(Errc::kMalformed, "empty column name");
    row.emplace_back(key, FieldValue(value));
  }
  return row;
}

std::string dump(const Json& j) {
  try {
    return j.dump();
  } catch (const Json::type_error& e) {
    throw Error(Errc::kMalformed, std::string("cannot serialise value: ") + e.what());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::kIo, "error reading '" + path.string() + "'");
  return ss.str();
}

fs::path temp_path_for(const fs::path& target) {
  return fs::path(target.string() + ".tmp-" + std::to_string(::getpid()));
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kPersistence, "cannot create '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(Errc::kPersistence, "cannot write '" + path.string() + "'");
}

}  // namespace

Dataset parse_jsonl(std::string_view bytes) {
  Dataset out;
  std::size_t line_start = 0;
  std::size_t line_no = 0;
  while (line_start < bytes.size()) {
    ++line_no;
    std::size_t end = bytes.find('\n', line_start);
    if (end == std::string_view::npos) end = bytes.size();
    std::string_view line = bytes.substr(line_start, end - line_start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) {
      Json obj;
      try {
        obj = Json::parse(line);
      } catch (const Json::parse_error& e) {
        throw Error(Errc::kMalformed,
                    "jsonl: line " + std::to_string(line_no) + ", byte offset " +
                        std::to_string(line_start + (e.byte ? e.byte - 1 : 0)) +
                        ": " + e.what());
      }
      if (!obj.is_object()) {
        throw Error(Errc::kMalformed, "jsonl: line " + std::to_string(line_no) +
                                          " (byte offset " + std::to_string(line_start) +
                                          ") is not a JSON object");
      }
      out.append_row(row_from_object(obj));
    }
    line_start = end + 1;
  }
  return out;
}

Dataset parse_json(std::string_view bytes) {
  if (bytes.find_first_not_of(" \t\r\n") == std::string_view::npos) return Dataset{};
  Json doc;
  try {
    doc = Json::parse(bytes);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::kMalformed, "json: byte offset " +
                                      std::to_string(e.byte ? e.byte - 1 : 0) + ": " +
                                      e.what());
  }
  if (!doc.is_array()) throw Error(Errc::kMalformed, "json: top level must be an array");
  Dataset out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (!doc[i].is_object()) {
      throw Error(Errc::kMalformed, "json: element " + std::to_string(i) + " is not an object");
    }
    out.append_row(row_from_object(doc[i]));
  }
  return out;
}

std::string to_jsonl(const Dataset& dataset) {
  std::string out;
  for (std::size_t r = 0; r < dataset.row_count(); ++r) {
    out += dump(dataset.row_json(r));
    out.push_back('\n');
  }
  return out;
}

std::string to_json(const Dataset& dataset) {
  Json arr = Json::array();
  for (std::size_t r = 0; r < dataset.row_count(); ++r) arr.push_back(dataset.row_json(r));
  return dump(arr) + "\n";
}

Dataset load_dataset(const fs::path& path, Format format) {
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    Dataset empty;
    empty.set_provenance(path.string());
    return empty;
  }
  const std::string bytes = read_file(path);
  Dataset out;
  switch (format) {
    case Format::kJsonl: out = parse_jsonl(bytes); break;
    case Format::kJson: out = parse_json(bytes); break;
    case Format::kCsv: {
      std::optional<CsvManifest> manifest;
      const fs::path mpath = csv_manifest_path(path);
      if (fs::exists(mpath, ec)) {
        Json mj = Json::parse(read_file(mpath), nullptr, false);
        if (mj.is_discarded()) {
          throw Error(Errc::kMalformed, "csv manifest '" + mpath.string() + "' is not JSON");
        }
        manifest = manifest_from_json(mj);
      }
      out = parse_csv(bytes, manifest);
      break;
    }
  }
  out.set_provenance(path.string());
  return out;
}

void save_dataset(const Dataset& dataset, const fs::path& path, Format format,
                  const CommitHook& hook) {
  std::vector<std::pair<fs::path, std::string>> files;
  switch (format) {
    case Format::kJsonl: files.emplace_back(path, to_jsonl(dataset)); break;
    case Format::kJson: files.emplace_back(path, to_json(dataset)); break;
    case Format::kCsv:
      files.emplace_back(path, to_csv(dataset));
      files.emplace_back(csv_manifest_path(path),
                         manifest_to_json(csv_manifest_for(dataset)).dump(2) + "\n");
      break;
  }
  std::vector<fs::path> temps;
  try {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    for (const auto& [target, bytes] : files) {
      temps.push_back(temp_path_for(target));
      write_file(temps.back(), bytes);
    }
    for (const auto& t : temps) {
      if (hook) hook(t);
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
      fs::rename(temps[i], files[i].first);
    }
  } catch (const std::exception& e) {
    std::error_code ec;
    for (const auto& t : temps) fs::remove(t, ec);
    throw Error(Errc::kPersistence, "persisting '" + path.string() + "' failed: " + e.what());
  }
}

// --- RunLease ------------------------------------------------------------

RunLease::RunLease(RunLease&& other) noexcept : session_(other.session_) {
  other.session_ = nullptr;
}

RunLease::~RunLease() {
  if (session_ != nullptr) session_->running_.store(false);
}

// --- StorageSession ------------------------------------------------------

StorageSession::StorageSession(Dataset initial)
    : current_(std::make_shared<const Dataset>(std::move(initial))) {}

std::unique_ptr<StorageSession> StorageSession::open(const fs::path& path, Format format) {
  auto session = std::make_unique<StorageSession>(load_dataset(path, format));
  session->path_ = path;
  session->format_ = format;
  return session;
}

std::shared_ptr<const Dataset> StorageSession::current() const {
  std::lock_guard lock(mu_);
  return current_;
}

Dataset StorageSession::read(const std::vector<std::string>& selection) const {
  auto snap = current();
  if (selection.empty()) return *snap;
  return snap->project(selection);
}

std::vector<std::string> StorageSession::columns() const { return current()->columns(); }

std::size_t StorageSession::row_count() const { return current()->row_count(); }

std::uint64_t StorageSession::revision() const {
  std::lock_guard lock(mu_);
  return revision_;
}

std::size_t StorageSession::write(const Delta& delta) {
  bool expected = false;
  if (!writing_.compare_exchange_strong(expected, true)) {
    throw Error(Errc::kConcurrentWriter, "another writer holds the session");
  }
  struct Release {
    std::atomic<bool>& flag;
    ~Release() { flag.store(false); }
  } release{writing_};

  Dataset next = *current();
  if (const auto* col = std::get_if<NewColumn>(&delta)) {
    if (col->values.size() != next.row_count()) {
      throw Error(Errc::kLengthMismatch,
                  "column '" + col->name + "' has " + std::to_string(col->values.size()) +
                      " values for " + std::to_string(next.row_count()) + " rows");
    }
    next.add_column(col->name);
    for (std::size_t r = 0; r < col->values.size(); ++r) next.set(r, col->name, col->values[r]);
  } else if (const auto* app = std::get_if<AppendRows>(&delta)) {
    for (const auto& row : app->rows) next.append_row(row);
  } else {
    auto provenance = next.provenance();
    next = std::get<ReplaceDataset>(delta).dataset;
    if (provenance) next.set_provenance(*provenance);
  }

  if (path_) save_dataset(next, *path_, *format_, hook_);

  const std::size_t rows = next.row_count();
  std::lock_guard lock(mu_);
  current_ = std::make_shared<const Dataset>(std::move(next));
  ++revision_;
  return rows;
}

std::optional<RunLease> StorageSession::try_acquire_run() {
  bool expected = false;
  if (!running_.compare_exchange_strong(expected, true)) return std::nullopt;
  return RunLease(this);
}

CheckpointRef StorageSession::snapshot(std::string_view stage_id, const fs::path& dir) const {
  auto snap = current();
  const std::string bytes = to_jsonl(*snap);
  CheckpointRef ref{std::string(stage_id), sha256_hex(bytes),
                    dir / (std::string(stage_id) + ".jsonl")};
  Json meta{{"stage_id", ref.stage_id},
            {"digest", ref.digest},
            {"rows", snap->row_count()},
            {"columns", snap->columns()}};
  const fs::path meta_path = dir / (std::string(stage_id) + ".meta.json");
  try {
    fs::create_directories(dir);
    const fs::path tmp = temp_path_for(ref.location);
    write_file(tmp, bytes);
    fs::rename(tmp, ref.location);
    const fs::path meta_tmp = temp_path_for(meta_path);
    write_file(meta_tmp, meta.dump(2) + "\n");
    fs::rename(meta_tmp, meta_path);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::kPersistence, "snapshot '" + ref.stage_id + "' failed: " + e.what());
  }
  return ref;
}

namespace {

fs::path meta_path_for(const CheckpointRef& ref) {
  return ref.location.parent_path() / (ref.stage_id + ".meta.json");
}

}  // namespace

Dataset restore(const CheckpointRef& ref) {
  std::error_code ec;
  if (!fs::exists(ref.location, ec)) {
    throw Error(Errc::kMissingSnapshot, "snapshot '" + ref.stage_id + "' not found at " +
                                            ref.location.string());
  }
  const std::string bytes = read_file(ref.location);
  const std::string digest = sha256_hex(bytes);
  if (digest != ref.digest) {
    throw Error(Errc::kDigestMismatch, "snapshot '" + ref.stage_id + "' digest " + digest +
                                           " does not match recorded " + ref.digest);
  }
  Dataset data = parse_jsonl(bytes);
  // JSONL cannot carry the column list of an empty dataset; the meta file can.
  const fs::path meta = meta_path_for(ref);
  if (fs::exists(meta, ec)) {
    Json mj = Json::parse(read_file(meta), nullptr, false);
    if (!mj.is_discarded() && mj.contains("columns") && mj["columns"].is_array()) {
      Dataset shaped(mj["columns"].get<std::vector<std::string>>());
      for (std::size_t r = 0; r < data.row_count(); ++r) {
        Row row;
        for (std::size_t c = 0; c < data.column_count(); ++c) {
          row.emplace_back(data.columns()[c], data.at(r, c));
        }
        shaped.append_row(row);
      }
      data = std::move(shaped);
    }
  }
  data.set_provenance(ref.location.string());
  return data;
}

CheckpointRef load_checkpoint_ref(const fs::path& dir, std::string_view stage_id) {
  const fs::path meta = dir / (std::string(stage_id) + ".meta.json");
  std::error_code ec;
  if (!fs::exists(meta, ec)) {
    throw Error(Errc::kMissingSnapshot, "no checkpoint metadata for '" +
                                            std::string(stage_id) + "'");
  }
  Json mj = Json::parse(read_file(meta), nullptr, false);
  if (mj.is_discarded() || !mj.contains("digest")) {
    throw Error(Errc::kMalformed, "checkpoint metadata '" + meta.string() + "' is malformed");
  }
  return CheckpointRef{std::string(stage_id), mj["digest"].get<std::string>(),
                       dir / (std::string(stage_id) + ".jsonl")};
}

std::string dataset_digest(const Dataset& dataset) { return sha256_hex(to_jsonl(dataset)); }

}  // namespace dataprep
