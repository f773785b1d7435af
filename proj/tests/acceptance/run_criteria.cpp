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

// Criteria 3, 5, 7 and 9: whole-pipeline runs through the engine and the CLI.
#include <sqlite3.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "criteria.hpp"
#include "dataprep/catalog.hpp"
#include "dataprep/storage.hpp"

namespace fs = std::filesystem;

namespace dataprep::acceptance {
namespace {

// Digest of `run pipelines/text2sql_generation.json --seed 42`, recorded from
// a reference run. The output holds 13 rows.
constexpr const char* kGoldenDigest = "7a1e203dd4787cc0616f20bebe7ac31b24e3d265c9fce27a790aa74cf1e6108d";

fs::path source(const std::string& rel) { return fs::path(DATAPREP_SOURCE_DIR) / rel; }

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag)
      : path_(fs::temp_directory_path() / ("dataprep-accept-" + tag + "-" + std::to_string(now_ns()))) {
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

int cli(std::vector<std::string> args, std::string* output = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (output) *output = out.str() + err.str();
  return code;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct GenerationRun {
  ExecutionState state;
  std::string jsonl;
};

GenerationRun run_generation(const PipelineDef& def, const CompiledPlan& plan, const fs::path& run_dir,
                             std::optional<std::size_t> stop_after) {
  auto rt = open_runtime(def);
  StorageSession session(load_input(def));
  auto state = forward(plan, session, {run_dir, 42, rt.serving.get(), &rt.resources, stop_after});
  return {state, to_jsonl(session.read())};
}

// --- independent SQL checks --------------------------------------------------------

struct Sweep {
  sqlite3* db = nullptr;
  ~Sweep() { sqlite3_close(db); }
};

int deadline_hit(void* p) {
  return now_ns() > *static_cast<long long*>(p) ? 1 : 0;
}

// Runs `sql` and returns its rows as a sorted multiset of rendered tuples.
std::optional<std::vector<std::string>> execute(sqlite3* db, const std::string& sql, int timeout_ms) {
  long long deadline = now_ns() + static_cast<long long>(timeout_ms) * 1000000;
  sqlite3_progress_handler(db, 1000, deadline_hit, &deadline);
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK) return std::nullopt;
  std::vector<std::string> rows;
  int rc;
  while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
    std::string row;
    for (int c = 0; c < sqlite3_column_count(stmt); ++c) {
      char buf[64];
      switch (sqlite3_column_type(stmt, c)) {
        case SQLITE_NULL: row += "N|"; break;
        case SQLITE_INTEGER:
        case SQLITE_FLOAT:
          std::snprintf(buf, sizeof buf, "%.12g", sqlite3_column_double(stmt, c));
          row += std::string("#") + buf + "|";
          break;
        default:
          row += "T" + std::string(reinterpret_cast<const char*>(sqlite3_column_text(stmt, c))) + "|";
      }
    }
    rows.push_back(row);
  }
  sqlite3_finalize(stmt);
  sqlite3_progress_handler(db, 0, nullptr, nullptr);
  if (rc != SQLITE_DONE) return std::nullopt;
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::optional<std::string> last_sql_block(const std::string& text) {
  const std::string open = "```sql";
  auto start = text.rfind(open);
  if (start == std::string::npos) return std::nullopt;
  start += open.size();
  auto end = text.find("```", start);
  if (end == std::string::npos) return std::nullopt;
  std::string body = text.substr(start, end - start);
  const auto first = body.find_first_not_of(" \t\r\n");
  const auto last = body.find_last_not_of(" \t\r\n;");
  if (first == std::string::npos) return std::nullopt;
  return body.substr(first, last - first + 1);
}

}  // namespace

Verdict resume_equivalence() {
  const auto start = now_ns();
  ScratchDir dir("resume");
  auto def = PipelineDef::load(source("pipelines/text2sql_generation.json"));
  Catalog catalog;
  auto compiled = catalog.compile(def);
  if (!std::holds_alternative<CompiledPlan>(compiled)) return {false, "generation pipeline did not compile"};
  const auto& plan = std::get<CompiledPlan>(compiled);
  const std::size_t n = plan.nodes().size();
  const auto reference = run_generation(def, plan, dir.path() / "full", std::nullopt);

  std::size_t matched = 0;
  std::string problem;
  for (std::size_t stop = 0; stop < n; ++stop) {
    const auto run_dir = dir.path() / ("stop" + std::to_string(stop));
    run_generation(def, plan, run_dir, stop);
    // A fresh runtime and an empty session, as after a process restart.
    auto rt = open_runtime(def);
    StorageSession session{Dataset{}};
    auto done = resume(plan, load_state(run_dir), session,
                       {run_dir, 42, rt.serving.get(), &rt.resources, std::nullopt});
    if (done.finished && to_jsonl(session.read()) == reference.jsonl) {
      ++matched;
    } else if (problem.empty()) {
      problem = "; resume after " + std::to_string(stop) + " nodes differs";
    }
  }
  const double secs = seconds_since(start);
  std::ostringstream os;
  os << matched << "/" << n << " interruption points byte-identical (" << n << "-node plan, "
     << std::count(reference.jsonl.begin(), reference.jsonl.end(), '\n') << " rows), " << secs << " s" << problem;
  return {n == 7 && matched == n && secs < 60.0, os.str()};
}

Verdict text2sql_end_to_end() {
  const auto start = now_ns();
  ScratchDir dir("e2e");
  auto def = PipelineDef::load(source("pipelines/text2sql_generation.json"));
  Catalog catalog;
  auto compiled = catalog.compile(def);
  if (!std::holds_alternative<CompiledPlan>(compiled)) return {false, "generation pipeline did not compile"};
  auto run = run_generation(def, std::get<CompiledPlan>(compiled), dir.path() / "run", std::nullopt);
  if (!run.state.finished) return {false, "run did not finish"};
  const Dataset out = parse_jsonl(run.jsonl);
  const auto& first = run.state.completed.front().report;

  std::size_t null_cells = 0;
  const char* required[] = {"sql", "question", "cot", "prompt", "component_difficulty", "execution_difficulty"};
  for (const char* c : required) {
    if (!out.has_column(c)) return {false, std::string("missing column ") + c};
    for (std::size_t r = 0; r < out.row_count(); ++r) null_cells += out.at(r, c).is_null();
  }

  // Re-execute against a fresh copy of the bundled database.
  Sweep sweep;
  sqlite3_open(":memory:", &sweep.db);
  char* msg = nullptr;
  if (sqlite3_exec(sweep.db, read_all(source("data/sample_db.sql")).c_str(), nullptr, nullptr, &msg) != SQLITE_OK) {
    std::string m = msg ? msg : "?";
    sqlite3_free(msg);
    return {false, "could not load sample database: " + m};
  }
  std::size_t exec_ok = 0, cot_ok = 0;
  for (std::size_t r = 0; r < out.row_count(); ++r) {
    auto ref = execute(sweep.db, out.at(r, "sql").as_text(), 5000);
    if (!ref) continue;
    ++exec_ok;
    const auto& cot = out.at(r, "cot");
    if (cot.is_null()) continue;
    auto block = last_sql_block(cot.as_text());
    if (!block) continue;
    auto got = execute(sweep.db, *block, 5000);
    cot_ok += got && *got == *ref;
  }
  const double secs = seconds_since(start);
  std::ostringstream os;
  os << first.rows_out << " generated, " << out.row_count() << " survived, " << null_cells
     << " null required cells, " << exec_ok << " execute, " << cot_ok << " cot matches, " << secs << " s";
  const bool pass = first.rows_out == 20 && out.row_count() > 0 && null_cells == 0 &&
                    exec_ok == out.row_count() && cot_ok == out.row_count() && secs < 10.0;
  return {pass, os.str()};
}

Verdict reproducibility() {
  ScratchDir dir("repro");
  const auto file = source("pipelines/text2sql_generation.json").string();
  std::vector<std::string> digests;
  std::string log;
  for (const char* name : {"a", "b"}) {
    const auto run_dir = dir.path() / name;
    if (cli({"run", file, "--seed", "42", "--out", run_dir.string()}, &log) != cli::kExitOk) {
      return {false, "run failed: " + log};
    }
    digests.push_back(dataset_digest(load_dataset(run_dir / "output.jsonl", Format::kJsonl)));
  }
  std::ostringstream os;
  os << "digest " << digests[0].substr(0, 16) << "... twice";
  if (digests[0] != digests[1]) os << "; second run gave " << digests[1].substr(0, 16);
  if (digests[0] != kGoldenDigest) os << "; recorded reference " << std::string(kGoldenDigest).substr(0, 16);
  return {digests[0] == digests[1] && digests[0] == kGoldenDigest, os.str()};
}

Verdict scaffolding() {
  ScratchDir dir("init");
  const std::vector<std::string> kinds = {"operator", "prompt-template", "pipeline", "full-repository"};
  std::size_t passed = 0, pipelines = 0;
  std::string problem;
  for (const auto& kind : kinds) {
    const auto name = "scaffold_" + std::string(kind == "prompt-template" ? "prompt_template"
                                                 : kind == "full-repository" ? "full_repository"
                                                                             : kind);
    const auto target = dir.path() / name;
    std::string log;
    bool ok = cli({"init", name, "--kinds", kind, "--dir", target.string()}, &log) == cli::kExitOk;
    ok = ok && cli({"check", target.string()}, &log) == cli::kExitOk;
    if (ok && fs::exists(target / "pipelines")) {
      for (const auto& f : fs::directory_iterator(target / "pipelines")) {
        ++pipelines;
        ok = ok && cli({"compile", f.path().string()}, &log) == cli::kExitOk;
      }
    }
    if (ok) {
      ++passed;
    } else if (problem.empty()) {
      problem = "; " + kind + ": " + log;
    }
  }
  std::ostringstream os;
  os << passed << "/" << kinds.size() << " kinds pass check, " << pipelines << " scaffolded pipelines compile"
     << problem;
  return {passed == kinds.size(), os.str()};
}

}  // namespace dataprep::acceptance
