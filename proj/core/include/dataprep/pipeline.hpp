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

#ifndef DATAPREP_PIPELINE_HPP_
#define DATAPREP_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dataprep/operator.hpp"
#include "dataprep/prompt.hpp"
#include "dataprep/serving.hpp"
#include "dataprep/storage.hpp"

namespace dataprep {

// --- definition ---------------------------------------------------------------

struct InitialColumn {
  std::string name;
  std::optional<Kind> kind;  // nullopt: unknown, compatible with any role
};

struct NodeDef {
  std::string operator_name;
  /// Operator parameters plus the generic keys "template" (prompt template
  /// id) and "overwrite" (allow re-producing an existing column).
  Json config = Json::object();
  KeyBinding bindings;
  /// Extra ordering constraints, as indices of other nodes.
  std::vector<std::size_t> depends_on;
};

struct StorageDef {
  std::optional<std::filesystem::path> location;
  Format format = Format::kJsonl;
  /// Rows given directly in the definition instead of a file.
  std::optional<Json> inline_rows;
};

enum class LawPolicy { kFail, kWarn };

/// What a pipeline file describes. Relative paths are resolved against
/// `base_dir` (the directory holding the file).
struct PipelineDef {
  std::vector<InitialColumn> initial_columns;
  bool has_initial_columns = false;
  std::vector<NodeDef> operators;
  std::optional<BackendConfig> serving;
  StorageDef storage;
  /// Named runtime resources, e.g. {"database": {"location": ..., "dialect": ...}}.
  Json resources = Json::object();
  /// Rows with a null in any of these columns are dropped after the last node.
  std::vector<std::string> required_output_columns;
  LawPolicy category_law_policy = LawPolicy::kFail;
  std::vector<std::string> extension_paths;
  std::filesystem::path base_dir = ".";

  static PipelineDef from_json(const Json& json,
                               const std::filesystem::path& base_dir = ".");
  /// Throws Error(kIo) or Error(kMalformed).
  static PipelineDef load(const std::filesystem::path& path);
  Json to_json() const;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

// --- compile ------------------------------------------------------------------

enum class DiagCode {
  kMissingColumn,
  kKindMismatch,
  kDuplicateProducer,
  kModalityMismatch,
  kUnknownOperator,
  kBindingIncomplete,
  kCycle,
};

std::string_view to_string(DiagCode code);
std::optional<DiagCode> parse_diag_code(std::string_view name);

enum class Severity { kError, kWarning };

struct Diagnostic {
  Severity severity = Severity::kError;
  DiagCode code = DiagCode::kMissingColumn;
  std::optional<std::size_t> node;
  std::string subject;  // column or role name
  std::string message;

  Json to_json() const;
};

struct CompileReport {
  std::vector<Diagnostic> diagnostics;

  bool empty() const { return diagnostics.empty(); }
  Json to_json() const;
  /// One line per diagnostic, for terminals.
  std::string to_text() const;
};

struct PlanNode {
  std::size_t index = 0;
  const RegistryEntry* entry = nullptr;
  KeyBinding binding;
  Json config;
  std::optional<std::string> template_id;
  std::shared_ptr<Operator> instance;  // configured at compile time

  const OperatorDescriptor& descriptor() const { return entry->descriptor; }
  const std::string& name() const { return entry->descriptor.name; }
  /// Columns bound to output roles.
  std::vector<std::string> output_columns() const;
};

/// A data edge: `to` reads `column` as last written by `from`.
struct PlanEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  std::string column;
};

struct ColumnInfo {
  std::optional<Kind> kind;
  std::optional<std::size_t> producer;  // nullopt for initial columns
};

class CompiledPlan {
 public:
  const std::vector<PlanNode>& nodes() const { return nodes_; }
  const std::vector<PlanEdge>& edges() const { return edges_; }
  /// Ordering-only constraints (explicit dependencies, write-after-read).
  const std::vector<std::pair<std::size_t, std::size_t>>& order_edges() const {
    return order_edges_;
  }
  const std::vector<std::size_t>& topo_order() const { return order_; }
  const std::map<std::string, ColumnInfo>& kinds() const { return kinds_; }
  const std::string& digest() const { return digest_; }
  const PipelineDef& def() const { return def_; }

  Json summary() const;

 private:
  friend std::variant<CompiledPlan, CompileReport> compile(const PipelineDef&,
                                                           const OperatorRegistry&,
                                                           const TemplateRegistry&);
  std::vector<PlanNode> nodes_;
  std::vector<PlanEdge> edges_;
  std::vector<std::pair<std::size_t, std::size_t>> order_edges_;
  std::vector<std::size_t> order_;
  std::map<std::string, ColumnInfo> kinds_;
  std::string digest_;
  PipelineDef def_;
};

using CompileResult = std::variant<CompiledPlan, CompileReport>;

/// Pure static analysis: no storage reads, no serving traffic. Returns a plan
/// or a report holding every diagnostic found.
CompileResult compile(const PipelineDef& def, const OperatorRegistry& operators,
                      const TemplateRegistry& templates);

/// Kahn's algorithm over `n` nodes, always taking the smallest ready index.
/// Returns nullopt on a cycle.
std::optional<std::vector<std::size_t>> topo_sort(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// Digest over the canonical JSON of nodes, bindings, configs and templates.
std::string plan_digest(const std::vector<PlanNode>& nodes);

// --- execution ----------------------------------------------------------------

struct NodeRecord {
  std::size_t node = 0;
  std::string operator_name;
  CheckpointRef checkpoint;
  RunReport report;
  double seconds = 0.0;
  std::vector<std::string> warnings;
};

struct ExecutionState {
  std::string plan_digest;
  std::uint64_t seed = 0;
  std::optional<CheckpointRef> input_checkpoint;
  std::vector<NodeRecord> completed;  // in execution order
  bool finished = false;
  std::optional<Json> final_report;

  std::set<std::size_t> completed_nodes() const;
  Json to_json() const;
  static ExecutionState from_json(const Json& json);
};

struct ExecutionEnv {
  std::filesystem::path run_dir;
  std::uint64_t seed = 0;
  const ServingClient* serving = nullptr;
  const ResourceSet* resources = nullptr;
  /// Stop (unfinished) once this many nodes have completed in total.
  std::optional<std::size_t> stop_after;
};

/// Raised when a node fails; carries the state up to the last completed node.
class NodeFailure : public Error {
 public:
  NodeFailure(Errc code, const std::string& message, std::size_t node,
              ExecutionState state)
      : Error(code, message), node_(node), state_(std::move(state)) {}

  std::size_t node() const { return node_; }
  const ExecutionState& state() const { return state_; }

 private:
  std::size_t node_;
  ExecutionState state_;
};

/// Runs every node in topological order, checkpointing after each one and
/// writing `<run_dir>/manifest.json` as it goes.
ExecutionState forward(const CompiledPlan& plan, StorageSession& session,
                       const ExecutionEnv& env);

/// Restores the last checkpoint of `state` and runs the remaining nodes.
/// Throws kPlanDigestMismatch when the plan changed.
ExecutionState resume(const CompiledPlan& plan, ExecutionState state,
                      StorageSession& session, const ExecutionEnv& env);

std::filesystem::path manifest_path(const std::filesystem::path& run_dir);
ExecutionState load_state(const std::filesystem::path& run_dir);

}  // namespace dataprep

#endif  // DATAPREP_PIPELINE_HPP_
