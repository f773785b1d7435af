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

#ifndef DATAPREP_STORAGE_HPP_
#define DATAPREP_STORAGE_HPP_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dataprep/value.hpp"

namespace dataprep {

enum class Format { kJson, kJsonl, kCsv };

std::string_view to_string(Format format);
std::optional<Format> parse_format(std::string_view name);

// --- Codecs ---------------------------------------------------------------

/// Column -> declared kind for CSV sidecar manifests. "mixed" columns hold
/// JSON-encoded cells.
struct CsvManifest {
  std::vector<std::pair<std::string, std::optional<Kind>>> columns;
};

Dataset parse_jsonl(std::string_view bytes);
Dataset parse_json(std::string_view bytes);
Dataset parse_csv(std::string_view bytes,
                  const std::optional<CsvManifest>& manifest = std::nullopt);

/// Canonical JSONL: one object per row, every column present in column order.
std::string to_jsonl(const Dataset& dataset);
std::string to_json(const Dataset& dataset);
std::string to_csv(const Dataset& dataset);
CsvManifest csv_manifest_for(const Dataset& dataset);
Json manifest_to_json(const CsvManifest& manifest);
CsvManifest manifest_from_json(const Json& json);

std::filesystem::path csv_manifest_path(const std::filesystem::path& csv);

/// Reads a dataset file. A missing or empty file yields an empty dataset.
Dataset load_dataset(const std::filesystem::path& path, Format format);

/// Called with each temp file right before it is renamed into place; throwing
/// aborts the commit. Used to inject persistence failures.
using CommitHook = std::function<void(const std::filesystem::path&)>;

/// Writes temp files then renames them over the targets (CSV also writes its
/// manifest). On failure the original files are untouched.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path,
                  Format format, const CommitHook& hook = {});

// --- Sessions -------------------------------------------------------------

struct NewColumn {
  std::string name;
  std::vector<FieldValue> values;
};
struct AppendRows {
  std::vector<Row> rows;
};
struct ReplaceDataset {
  Dataset dataset;
};

/// A NewColumn naming an existing column replaces that column's values.
using Delta = std::variant<NewColumn, AppendRows, ReplaceDataset>;

struct CheckpointRef {
  std::string stage_id;
  std::string digest;
  std::filesystem::path location;
};

class StorageSession;

/// Exclusive right to run a pipeline over a session; released on destruction.
class RunLease {
 public:
  RunLease(RunLease&& other) noexcept;
  RunLease& operator=(RunLease&&) = delete;
  RunLease(const RunLease&) = delete;
  ~RunLease();

 private:
  friend class StorageSession;
  explicit RunLease(StorageSession* session) : session_(session) {}
  StorageSession* session_;
};

/// Mediates every read and write against one dataset. Reads return value
/// snapshots and may run concurrently; a write that finds another write in
/// progress fails with Errc::kConcurrentWriter instead of blocking.
class StorageSession {
 public:
  /// In-memory session.
  explicit StorageSession(Dataset initial = {});

  /// File-backed session. The file need not exist yet.
  static std::unique_ptr<StorageSession> open(const std::filesystem::path& path,
                                              Format format);

  StorageSession(const StorageSession&) = delete;
  StorageSession& operator=(const StorageSession&) = delete;

  /// Empty selection means every column.
  Dataset read(const std::vector<std::string>& selection = {}) const;
  std::vector<std::string> columns() const;
  std::size_t row_count() const;

  /// Applies `delta`, persists it when file-backed, and returns the new row
  /// count. Nothing changes if this throws.
  std::size_t write(const Delta& delta);

  std::uint64_t revision() const;

  /// Materialises the current dataset as `<dir>/<stage_id>.jsonl` plus a
  /// `.meta.json` with its digest.
  CheckpointRef snapshot(std::string_view stage_id,
                         const std::filesystem::path& dir) const;

  std::optional<RunLease> try_acquire_run();

  void set_commit_hook(CommitHook hook) { hook_ = std::move(hook); }

  const std::optional<std::filesystem::path>& path() const { return path_; }
  std::optional<Format> format() const { return format_; }

 private:
  friend class RunLease;
  std::shared_ptr<const Dataset> current() const;

  std::optional<std::filesystem::path> path_;
  std::optional<Format> format_;
  mutable std::mutex mu_;
  std::shared_ptr<const Dataset> current_;
  std::uint64_t revision_ = 0;
  std::atomic<bool> writing_{false};
  std::atomic<bool> running_{false};
  CommitHook hook_;
};

/// Loads a snapshot and verifies its digest. Throws kMissingSnapshot or
/// kDigestMismatch.
Dataset restore(const CheckpointRef& ref);

/// Reads `<dir>/<stage_id>.meta.json` back into a ref.
CheckpointRef load_checkpoint_ref(const std::filesystem::path& dir,
                                  std::string_view stage_id);

/// Digest of the canonical JSONL bytes of `dataset`.
std::string dataset_digest(const Dataset& dataset);

}  // namespace dataprep

#endif  // DATAPREP_STORAGE_HPP_
