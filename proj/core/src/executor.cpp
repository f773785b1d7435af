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

#include <chrono>
#include <fstream>
#include <sstream>

#include "dataprep/digest.hpp"
#include "dataprep/pipeline.hpp"

namespace dataprep {
namespace fs = std::filesystem;
namespace {

Json ref_json(const CheckpointRef& ref, const fs::path& run_dir) {
  auto rel = ref.location.lexically_relative(run_dir);
  auto loc = rel.empty() || *rel.begin() == ".." ? ref.location : rel;
  return {{"stage_id", ref.stage_id}, {"digest", ref.digest}, {"location", loc.generic_string()}};
}

CheckpointRef ref_from_json(const Json& j) {
  return {j.at("stage_id").get<std::string>(), j.at("digest").get<std::string>(),
          fs::path(j.at("location").get<std::string>())};
}

void rebase(CheckpointRef& ref, const fs::path& run_dir) {
  if (ref.location.is_relative()) ref.location = run_dir / ref.location;
}

void write_manifest(const ExecutionState& state, const fs::path& run_dir,
                    const Json& failure = nullptr) {
  Json j = state.to_json();
  if (j.contains("input_checkpoint") && state.input_checkpoint) {
    j["input_checkpoint"] = ref_json(*state.input_checkpoint, run_dir);
  }
  for (std::size_t i = 0; i < state.completed.size(); ++i) {
    j["nodes"][i]["checkpoint"] = ref_json(state.completed[i].checkpoint, run_dir);
  }
  if (!failure.is_null()) j["failure"] = failure;
  const auto path = manifest_path(run_dir);
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kPersistence, "cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw Error(Errc::kPersistence, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string stage_id(const PlanNode& node) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "node-%02zu", node.index);
  return buf + std::string("-") + node.name();
}

void apply_required_columns(const CompiledPlan& plan, StorageSession& session, Json& final) {
  const auto& required = plan.def().required_output_columns;
  std::size_t dropped = 0;
  if (!required.empty()) {
    Dataset data = session.read();
    std::vector<std::size_t> keep;
    std::vector<std::size_t> cols;
    for (const auto& c : required) {
      auto idx = data.column_index(c);
      if (!idx) throw MissingColumnError(c, data.columns());
      cols.push_back(*idx);
    }
    for (std::size_t r = 0; r < data.row_count(); ++r) {
      bool ok = std::none_of(cols.begin(), cols.end(),
                             [&](std::size_t c) { return data.at(r, c).is_null(); });
      if (ok) keep.push_back(r);
    }
    dropped = data.row_count() - keep.size();
    if (dropped > 0) session.write(ReplaceDataset{data.select_rows(keep)});
  }
  final["dropped_for_required_columns"] = dropped;
}

ExecutionState run_from(const CompiledPlan& plan, ExecutionState state,
                        StorageSession& session, const ExecutionEnv& env) {
  static const ResourceSet kNoResources;
  const ResourceSet& resources = env.resources ? *env.resources : kNoResources;
  const auto ckdir = env.run_dir / "checkpoints";
  const auto& order = plan.topo_order();

  for (std::size_t pos = state.completed.size(); pos < order.size(); ++pos) {
    if (env.stop_after && state.completed.size() >= *env.stop_after) {
      write_manifest(state, env.run_dir);
      return state;
    }
    const PlanNode& node = plan.nodes()[order[pos]];
    const auto& d = node.descriptor();
    const ServingClient* serving = d.requires_serving ? env.serving : nullptr;
    auto where = "node " + std::to_string(node.index) + " (" + node.name() + ")";

    auto fail = [&](Errc code, const std::string& msg) {
      Json failure = {{"node", node.index}, {"operator", node.name()}, {"error", msg}};
      write_manifest(state, env.run_dir, failure);
      throw NodeFailure(code, where + ": " + msg, node.index, state);
    };

    if (d.requires_serving && serving == nullptr) {
      fail(Errc::kServingMismatch, "no serving backend available");
    }
    auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    try {
      report = run_operator(d, *node.instance, session, node.binding, serving, resources,
                            derive_seed(state.seed, node.index));
    } catch (const Error& e) {
      fail(e.code(), e.what());
    } catch (const std::exception& e) {
      fail(Errc::kOperatorFailure, e.what());
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    NodeRecord rec;
    rec.node = node.index;
    rec.operator_name = node.name();
    rec.report = std::move(report);
    rec.seconds = seconds;
    if (auto v = check_category_law(rec.report, d.category, node.output_columns())) {
      if (plan.def().category_law_policy == LawPolicy::kFail) {
        fail(Errc::kCategoryLaw, *v);
      }
      rec.warnings.push_back(*v);
    }
    rec.checkpoint = session.snapshot(stage_id(node), ckdir);
    state.completed.push_back(std::move(rec));
    write_manifest(state, env.run_dir);
  }

  Json final = Json::object();
  apply_required_columns(plan, session, final);
  Json metrics = Json::object();
  for (const auto& rec : state.completed) {
    if (rec.report.dataset_metrics && !rec.report.dataset_metrics->empty()) {
      Json m = Json::object();
      for (const auto& [k, v] : *rec.report.dataset_metrics) m[k] = v;
      metrics[stage_id(plan.nodes()[rec.node])] = std::move(m);
    }
  }
  Dataset out = session.read();
  final["rows"] = out.row_count();
  final["columns"] = out.columns();
  final["dataset_digest"] = dataset_digest(out);
  final["dataset_metrics"] = std::move(metrics);
  state.final_report = std::move(final);
  state.finished = true;
  write_manifest(state, env.run_dir);
  return state;
}

}  // namespace

std::set<std::size_t> ExecutionState::completed_nodes() const {
  std::set<std::size_t> out;
  for (const auto& r : completed) out.insert(r.node);
  return out;
}

Json ExecutionState::to_json() const {
  Json nodes = Json::array();
  for (const auto& r : completed) {
    Json n = {{"node", r.node},
              {"operator", r.operator_name},
              {"checkpoint",
               {{"stage_id", r.checkpoint.stage_id},
                {"digest", r.checkpoint.digest},
                {"location", r.checkpoint.location.generic_string()}}},
              {"report", r.report.to_json()},
              {"seconds", r.seconds}};
    if (!r.warnings.empty()) n["warnings"] = r.warnings;
    nodes.push_back(std::move(n));
  }
  Json j = {{"plan_digest", plan_digest}, {"seed", seed}};
  if (input_checkpoint) {
    j["input_checkpoint"] = {{"stage_id", input_checkpoint->stage_id},
                             {"digest", input_checkpoint->digest},
                             {"location", input_checkpoint->location.generic_string()}};
  }
  j["nodes"] = std::move(nodes);
  j["finished"] = finished;
  if (final_report) j["final"] = *final_report;
  return j;
}

ExecutionState ExecutionState::from_json(const Json& j) {
  ExecutionState s;
  try {
    s.plan_digest = j.at("plan_digest").get<std::string>();
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("input_checkpoint")) s.input_checkpoint = ref_from_json(j["input_checkpoint"]);
    for (const auto& n : j.value("nodes", Json::array())) {
      NodeRecord r;
      r.node = n.at("node").get<std::size_t>();
      r.operator_name = n.value("operator", std::string{});
      r.checkpoint = ref_from_json(n.at("checkpoint"));
      r.report = RunReport::from_json(n.value("report", Json::object()));
      r.seconds = n.value("seconds", 0.0);
      r.warnings = n.value("warnings", std::vector<std::string>{});
      s.completed.push_back(std::move(r));
    }
    s.finished = j.value("finished", false);
    if (j.contains("final")) s.final_report = j["final"];
  } catch (const Json::exception& e) {
    throw Error(Errc::kMalformed, std::string("run manifest: ") + e.what());
  }
  return s;
}

fs::path manifest_path(const fs::path& run_dir) { return run_dir / "manifest.json"; }

ExecutionState load_state(const fs::path& run_dir) {
  const auto path = manifest_path(run_dir);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kMissingSnapshot, "no run manifest at " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Json j;
  try {
    j = Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw Error(Errc::kMalformed, path.string() + ": " + e.what());
  }
  auto state = ExecutionState::from_json(j);
  if (state.input_checkpoint) rebase(*state.input_checkpoint, run_dir);
  for (auto& r : state.completed) rebase(r.checkpoint, run_dir);
  return state;
}

ExecutionState forward(const CompiledPlan& plan, StorageSession& session,
                       const ExecutionEnv& env) {
  auto lease = session.try_acquire_run();
  if (!lease) throw Error(Errc::kConcurrentWriter, "another run holds this session");
  fs::create_directories(env.run_dir / "checkpoints");
  ExecutionState state;
  state.plan_digest = plan.digest();
  state.seed = env.seed;
  state.input_checkpoint = session.snapshot("input", env.run_dir / "checkpoints");
  return run_from(plan, std::move(state), session, env);
}

ExecutionState resume(const CompiledPlan& plan, ExecutionState state, StorageSession& session,
                      const ExecutionEnv& env) {
  if (state.plan_digest != plan.digest()) {
    throw Error(Errc::kPlanDigestMismatch,
                "the pipeline changed since this run was checkpointed (plan digest " +
                    state.plan_digest.substr(0, 12) + " vs " + plan.digest().substr(0, 12) +
                    ")");
  }
  const auto& order = plan.topo_order();
  if (state.completed.size() > order.size()) {
    throw Error(Errc::kMalformed, "run manifest lists more nodes than the plan has");
  }
  for (std::size_t i = 0; i < state.completed.size(); ++i) {
    if (state.completed[i].node != order[i]) {
      throw Error(Errc::kMalformed, "completed nodes are not a prefix of the plan order");
    }
  }
  auto lease = session.try_acquire_run();
  if (!lease) throw Error(Errc::kConcurrentWriter, "another run holds this session");
  fs::create_directories(env.run_dir / "checkpoints");

  std::optional<CheckpointRef> last;
  if (!state.completed.empty()) {
    last = state.completed.back().checkpoint;
  } else {
    last = state.input_checkpoint;
  }
  if (!last) throw Error(Errc::kMissingSnapshot, "run manifest has no checkpoint to resume from");
  session.write(ReplaceDataset{restore(*last)});
  if (state.finished) {
    // Nothing left to run; hand back the final dataset without calling operators.
    Json ignored = Json::object();
    apply_required_columns(plan, session, ignored);
    return state;
  }
  return run_from(plan, std::move(state), session, env);
}

}  // namespace dataprep
