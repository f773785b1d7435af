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

#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dataprep/catalog.hpp"
#include "scaffold.hpp"

namespace dataprep::cli {
namespace {

namespace fs = std::filesystem;

// Exclusive marker for a run directory; removed on destruction.
class RunLock {
 public:
  explicit RunLock(fs::path path) : path_(std::move(path)) {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr) {
      throw Error(Errc::kConcurrentWriter,
                  "run directory is locked by another invocation (" + path_.string() + ")");
    }
    std::fclose(f);
  }
  ~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
};

void write_json(const fs::path& path, const Json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<std::string> resolved_extension_paths(const PipelineDef& def) {
  std::vector<std::string> out;
  for (const auto& p : def.extension_paths) out.push_back(def.resolve(p).string());
  return out;
}

// --- compile / run ---------------------------------------------------------------

struct CompileOptions {
  std::string file;
  std::string report;
};

int cmd_compile(const CompileOptions& o, std::ostream& out, std::ostream& err) {
  PipelineDef def = PipelineDef::load(o.file);
  Catalog catalog(resolved_extension_paths(def));
  auto result = catalog.compile(def);
  if (auto* report = std::get_if<CompileReport>(&result)) {
    err << report->to_text();
    if (!o.report.empty()) write_json(o.report, report->to_json());
    return kExitCompile;
  }
  const auto& plan = std::get<CompiledPlan>(result);
  if (!o.report.empty()) write_json(o.report, CompileReport{}.to_json());
  out << plan.summary().dump(2) << '\n';
  return kExitOk;
}

struct RunOptions {
  std::string file;
  std::string resume;
  std::string out_dir;
  bool dry_run = false;
  std::uint64_t seed = 0;
  bool seed_given = false;
  long stop_after = -1;
  bool prune = false;
};

fs::path default_run_dir(const std::string& file) {
  return fs::path("runs") / fs::path(file).stem();
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  PipelineDef def = PipelineDef::load(o.file);
  Catalog catalog(resolved_extension_paths(def));
  auto result = catalog.compile(def);
  const fs::path run_dir = !o.resume.empty()    ? fs::path(o.resume)
                           : !o.out_dir.empty() ? fs::path(o.out_dir)
                                                : default_run_dir(o.file);
  if (auto* report = std::get_if<CompileReport>(&result)) {
    err << report->to_text();
    if (!o.dry_run) write_json(run_dir / "compile-report.json", report->to_json());
    return kExitCompile;
  }
  const auto& plan = std::get<CompiledPlan>(result);
  if (o.dry_run) {
    out << plan.summary().dump(2) << '\n';
    return kExitOk;
  }

  std::optional<ExecutionState> previous;
  if (!o.resume.empty()) {
    previous = load_state(run_dir);
    if (o.seed_given && previous->seed != o.seed) {
      err << "warning: --seed ignored, resuming with the recorded seed " << previous->seed << '\n';
    }
  } else if (fs::exists(manifest_path(run_dir))) {
    err << "error: " << run_dir.string() << " already holds a run; pass --resume to continue it\n";
    return kExitUsage;
  }
  fs::create_directories(run_dir);
  RunLock lock(run_dir / "run.lock");

  Runtime rt = open_runtime(def);
  StorageSession session(previous ? Dataset{} : load_input(def));
  ExecutionEnv env;
  env.run_dir = run_dir;
  env.seed = previous ? previous->seed : o.seed;
  env.serving = rt.serving.get();
  env.resources = &rt.resources;
  if (o.stop_after >= 0) env.stop_after = static_cast<std::size_t>(o.stop_after);

  ExecutionState state;
  try {
    state = previous ? resume(plan, std::move(*previous), session, env)
                     : forward(plan, session, env);
  } catch (const NodeFailure& f) {
    const auto& node = plan.nodes().at(f.node());
    err << "error: node " << node.index << " (" << node.name() << ") failed: " << f.what() << '\n';
    return kExitRuntime;
  }
  if (!state.finished) {
    err << "stopped after " << state.completed.size() << " of " << plan.nodes().size()
        << " nodes; continue with --resume " << run_dir.string() << '\n';
    return kExitOk;
  }
  const Format format = def.storage.location ? def.storage.format : Format::kJsonl;
  const fs::path output = run_dir / ("output." + std::string(to_string(format)));
  if (session.revision() > 0 || !fs::exists(output)) {
    save_dataset(session.read(), output, format);
  }
  Json summary = state.final_report.value_or(Json::object());
  summary["output"] = output.string();
  if (o.prune) {
    std::error_code ec;
    fs::remove_all(run_dir / "checkpoints", ec);
    summary["checkpoints_pruned"] = !ec;
  }
  out << summary.dump(2) << '\n';
  return kExitOk;
}

// --- list / render ----------------------------------------------------------------

template <typename E>
std::string valid_values(std::initializer_list<E> all) {
  std::string s;
  for (auto v : all) s += (s.empty() ? "" : ", ") + std::string(to_string(v));
  return s;
}

struct ListOptions {
  std::string kind;
  std::string category, modality, tier;
  bool json = false;
};

int cmd_list(const ListOptions& o, std::ostream& out, std::ostream& err) {
  Catalog catalog;
  catalog.extensions().load_all();
  if (o.kind == "operators") {
    RegistryFilter f;
    if (!o.category.empty() && !(f.category = parse_category(o.category))) {
      err << "error: unknown category '" << o.category << "'; valid values: "
          << valid_values({Category::kGenerateField, Category::kGenerateRows,
                           Category::kEvaluateSample, Category::kEvaluateDataset,
                           Category::kFilter, Category::kRefine})
          << '\n';
      return kExitUsage;
    }
    if (!o.modality.empty() && !(f.modality = parse_modality(o.modality))) {
      err << "error: unknown modality '" << o.modality << "'; valid values: "
          << valid_values({Modality::kText, Modality::kVisual, Modality::kDocument}) << '\n';
      return kExitUsage;
    }
    if (!o.tier.empty() && !(f.tier = parse_tier(o.tier))) {
      err << "error: unknown tier '" << o.tier << "'; valid values: "
          << valid_values({Tier::kCore, Tier::kDomain}) << '\n';
      return kExitUsage;
    }
    if (o.json) {
      out << catalog.operators().dump(f).dump(2) << '\n';
      return kExitOk;
    }
    for (const auto* e : catalog.operators().list(f)) {
      const auto& d = e->descriptor;
      out << d.name << '\t' << to_string(d.category) << '\t' << to_string(d.modality) << '\t'
          << to_string(d.tier) << '\n';
    }
    return kExitOk;
  }
  if (o.kind == "templates") {
    if (o.json) {
      Json arr = Json::array();
      for (const auto* t : catalog.templates().list()) arr.push_back(t->to_json());
      out << arr.dump(2) << '\n';
      return kExitOk;
    }
    for (const auto* t : catalog.templates().list()) {
      out << t->identifier() << '\t' << t->description() << '\n';
    }
    return kExitOk;
  }
  err << "error: unknown listing '" << o.kind << "'; use operators or templates\n";
  return kExitUsage;
}

int cmd_render(const std::string& id, const std::string& context, std::ostream& out) {
  Catalog catalog;
  catalog.extensions().load_all();
  const auto& tmpl = catalog.templates().get(id);
  PromptContext ctx;
  if (!context.empty()) {
    Json j;
    try {
      j = Json::parse(context);
    } catch (const Json::parse_error& e) {
      throw Error(Errc::kMalformed, std::string("--context: ") + e.what());
    }
    if (!j.is_object()) throw Error(Errc::kMalformed, "--context must be a JSON object");
    for (const auto& [k, v] : j.items()) ctx[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  out << tmpl.build_prompt(ctx, /*strict=*/true) << '\n';
  return kExitOk;
}

// --- init / check -----------------------------------------------------------------

int cmd_init(const std::string& name, const std::vector<std::string>& kinds,
             const std::string& dir, std::ostream& out) {
  ScaffoldSpec spec;
  spec.name = name;
  spec.target = dir.empty() ? fs::path(name) : fs::path(dir);
  for (const auto& k : kinds.empty() ? std::vector<std::string>{"full-repository"} : kinds) {
    auto kind = parse_scaffold_kind(k);
    if (!kind) {
      throw Error(Errc::kInvalidArgument,
                  "unknown kind '" + k +
                      "'; valid values: operator, prompt-template, pipeline, full-repository");
    }
    spec.kinds.insert(*kind);
  }
  for (const auto& f : scaffold(spec)) out << (spec.target / f).string() << '\n';
  return kExitOk;
}

Dataset rows_dataset(const Json& rows) { return parse_json(rows.dump()); }

// Runs each case of tests/category_law.json on empty, given and 1000-row
// inputs and checks the category law of its operator.
int cmd_check(const std::string& dir, std::ostream& out, std::ostream& err) {
  const fs::path root(dir);
  if (!fs::exists(root / kExtensionManifestFile)) {
    err << "error: no " << kExtensionManifestFile << " in " << root.string() << '\n';
    return kExitUsage;
  }
  Catalog catalog({root.string()});
  catalog.extensions().load_all();
  const auto manifest = ExtensionManifest::load(root / kExtensionManifestFile);
  out << "extension " << manifest.name << ": " << manifest.operators.size() << " operator(s), "
      << manifest.templates.size() << " template(s)\n";
  for (const auto& p : manifest.pipelines) {
    PipelineDef def = PipelineDef::load(root / p);
    Catalog pc(resolved_extension_paths(def));
    auto result = pc.compile(def);
    if (auto* report = std::get_if<CompileReport>(&result)) {
      err << p.string() << ":\n" << report->to_text();
      return kExitCompile;
    }
    out << "ok  compile " << p.generic_string() << '\n';
  }

  const fs::path laws = root / "tests" / "category_law.json";
  if (!fs::exists(laws)) return kExitOk;
  std::ifstream in(laws);
  Json spec = Json::parse(in);
  int failures = 0;
  for (const auto& c : spec.at("cases")) {
    const auto name = c.at("operator").get<std::string>();
    const RegistryEntry* entry = catalog.operators().find(name);
    if (entry == nullptr) throw Error(Errc::kUnknownOperator, "unknown operator '" + name + "'");
    const KeyBinding binding = binding_from_json(c.at("bindings"));
    OperatorConfig cfg;
    cfg.params = c.value("config", Json::object());
    cfg.templates = &catalog.templates();
    auto instance = entry->configure(cfg);

    PipelineDef env_def;
    if (c.contains("serving")) env_def.serving = backend_config_from_json(c["serving"]);
    env_def.resources = c.value("resources", Json::object());
    env_def.base_dir = root;
    Runtime rt = open_runtime(env_def);

    const Dataset given = rows_dataset(c.at("rows"));
    Dataset big(given.columns());
    for (std::size_t i = 0; i < 1000 && given.row_count() > 0; ++i) {
      big.append_row(given.row(i % given.row_count()));
    }
    std::vector<std::string> declared;
    for (const auto& role : entry->descriptor.output_roles) {
      auto it = binding.find(role.name);
      if (it != binding.end()) declared.insert(declared.end(), it->second.begin(), it->second.end());
    }
    const std::pair<const char*, Dataset> inputs[] = {
        {"0 rows", Dataset(given.columns())}, {"given rows", given}, {"1000 rows", big}};
    for (const auto& [label, data] : inputs) {
      StorageSession session(data);
      auto report = run_operator(entry->descriptor, *instance, session, binding,
                                 rt.serving.get(), rt.resources, 0);
      auto violation = check_category_law(report, entry->descriptor.category, declared);
      if (violation) {
        ++failures;
        out << "FAIL " << name << " (" << label << "): " << *violation << '\n';
      } else {
        out << "ok  " << name << " (" << label << ")\n";
      }
    }
  }
  return failures == 0 ? kExitOk : kExitRuntime;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::kIo:
    case Errc::kMalformed:
    case Errc::kInvalidArgument:
    case Errc::kUnknownTemplate:
    case Errc::kMissingSlot:
    case Errc::kUnknownSlot:
    case Errc::kConcurrentWriter:
    case Errc::kPlanDigestMismatch:
    case Errc::kInvalidConfig:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compile, run and scaffold data-preparation pipelines.", "dataprep"};
  app.require_subcommand(1);

  CompileOptions compile_opts;
  auto* compile = app.add_subcommand("compile", "Validate a pipeline and print its plan");
  compile->add_option("file", compile_opts.file, "Pipeline definition")->required();
  compile->add_option("--report", compile_opts.report, "Write the JSON compile report here");

  RunOptions run_opts;
  auto* runc = app.add_subcommand("run", "Compile and execute a pipeline");
  runc->add_option("file", run_opts.file, "Pipeline definition")->required();
  runc->add_option("--resume", run_opts.resume, "Continue the run in this directory");
  runc->add_option("--out", run_opts.out_dir, "Run directory (default runs/<file stem>)");
  runc->add_flag("--dry-run", run_opts.dry_run, "Stop after compiling");
  auto* seed_opt = runc->add_option("--seed", run_opts.seed, "Root seed");
  runc->add_option("--stop-after", run_opts.stop_after, "Stop once this many nodes completed");
  runc->add_flag("--prune-checkpoints", run_opts.prune, "Delete node checkpoints after a finished run");

  ListOptions list_opts;
  auto* list = app.add_subcommand("list", "List operators or templates");
  list->add_option("kind", list_opts.kind, "operators | templates")->required();
  list->add_option("--category", list_opts.category);
  list->add_option("--modality", list_opts.modality);
  list->add_option("--tier", list_opts.tier);
  list->add_flag("--json", list_opts.json, "Print JSON instead of a table");

  std::string render_id, render_ctx;
  auto* render = app.add_subcommand("render", "Render a template with a JSON context");
  render->add_option("template", render_id)->required();
  render->add_option("--context", render_ctx, "JSON object of slot values");

  std::string init_name, init_dir;
  std::vector<std::string> init_kinds;
  auto* init = app.add_subcommand("init", "Scaffold an extension package");
  init->add_option("name", init_name, "Extension name")->required();
  init->add_option("--kinds", init_kinds,
                   "operator, prompt-template, pipeline, full-repository")
      ->delimiter(',');
  init->add_option("--dir", init_dir, "Target directory (default ./<name>)");

  std::string check_dir;
  auto* check = app.add_subcommand("check", "Compile an extension's pipelines and run its law tests");
  check->add_option("dir", check_dir, "Extension directory")->required();

  std::vector<std::string> argv_store{"dataprep"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  run_opts.seed_given = seed_opt->count() > 0;

  try {
    if (*compile) return cmd_compile(compile_opts, out, err);
    if (*runc) return cmd_run(run_opts, out, err);
    if (*list) return cmd_list(list_opts, out, err);
    if (*render) return cmd_render(render_id, render_ctx, out);
    if (*init) return cmd_init(init_name, init_kinds, init_dir, out);
    if (*check) return cmd_check(check_dir, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace dataprep::cli
