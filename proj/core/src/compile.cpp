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

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include "dataprep/digest.hpp"
#include "dataprep/pipeline.hpp"

namespace dataprep {
namespace {

constexpr std::pair<DiagCode, std::string_view> kDiagNames[] = {
    {DiagCode::kMissingColumn, "missing-column"},
    {DiagCode::kKindMismatch, "kind-mismatch"},
    {DiagCode::kDuplicateProducer, "duplicate-producer"},
    {DiagCode::kModalityMismatch, "modality-mismatch"},
    {DiagCode::kUnknownOperator, "unknown-operator"},
    {DiagCode::kBindingIncomplete, "binding-incomplete"},
    {DiagCode::kCycle, "cycle"},
};

std::string kind_name(const std::optional<Kind>& k) {
  return k ? std::string(to_string(*k)) : "any";
}

// Tarjan's strongly connected components; returns components that contain a
// cycle (size > 1 or a self loop), each sorted, in order of smallest member.
std::vector<std::vector<std::size_t>> cyclic_components(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<std::size_t>> adj(n);
  std::vector<bool> self_loop(n, false);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    if (u == v) self_loop[u] = true;
  }
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t u) {
    index[u] = low[u] = counter++;
    stack.push_back(u);
    on_stack[u] = true;
    for (auto v : adj[u]) {
      if (index[v] < 0) {
        visit(v);
        low[u] = std::min(low[u], low[v]);
      } else if (on_stack[v]) {
        low[u] = std::min(low[u], index[v]);
      }
    }
    if (low[u] == index[u]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != u);
      if (comp.size() > 1 || self_loop[u]) {
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  };
  for (std::size_t u = 0; u < n; ++u) {
    if (index[u] < 0) visit(u);
  }
  std::sort(out.begin(), out.end());
  return out;
}

nlohmann::json canonical(const Json& j) { return nlohmann::json::parse(j.dump()); }

}  // namespace

std::string_view to_string(DiagCode code) {
  for (const auto& [c, name] : kDiagNames) {
    if (c == code) return name;
  }
  return "?";
}

std::optional<DiagCode> parse_diag_code(std::string_view name) {
  for (const auto& [c, n] : kDiagNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

Json Diagnostic::to_json() const {
  Json j = {{"severity", severity == Severity::kError ? "error" : "warning"},
            {"code", std::string(to_string(code))}};
  j["node"] = node ? Json(*node) : Json(nullptr);
  j["subject"] = subject;
  j["message"] = message;
  return j;
}

Json CompileReport::to_json() const {
  Json out = Json::array();
  for (const auto& d : diagnostics) out.push_back(d.to_json());
  return out;
}

std::string CompileReport::to_text() const {
  std::ostringstream out;
  for (const auto& d : diagnostics) {
    out << (d.severity == Severity::kError ? "error" : "warning") << '[' << to_string(d.code)
        << ']';
    if (d.node) out << " node " << *d.node;
    if (!d.subject.empty()) out << " (" << d.subject << ')';
    out << ": " << d.message << '\n';
  }
  return out.str();
}

std::vector<std::string> PlanNode::output_columns() const {
  std::vector<std::string> out;
  for (const auto& r : descriptor().output_roles) {
    auto it = binding.find(r.name);
    if (it != binding.end() && !it->second.empty()) out.push_back(it->second.front());
  }
  return out;
}

Json CompiledPlan::summary() const {
  Json nodes = Json::array();
  for (const auto& n : nodes_) {
    nodes.push_back({{"index", n.index},
                     {"operator", n.name()},
                     {"category", std::string(to_string(n.descriptor().category))}});
  }
  Json edges = Json::array();
  for (const auto& e : edges_) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"column", e.column}});
  }
  return {{"nodes", std::move(nodes)},
          {"edges", std::move(edges)},
          {"order", order_},
          {"digest", digest_}};
}

std::optional<std::vector<std::size_t>> topo_sort(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<std::size_t>> adj(n);
  std::vector<std::size_t> indegree(n, 0);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    ++indegree[v];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    auto u = ready.top();
    ready.pop();
    order.push_back(u);
    for (auto v : adj[u]) {
      if (--indegree[v] == 0) ready.push(v);
    }
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

std::string plan_digest(const std::vector<PlanNode>& nodes) {
  Json doc = Json::array();
  for (const auto& n : nodes) {
    doc.push_back({{"operator", n.name()},
                   {"bindings", to_json(n.binding)},
                   {"config", n.config},
                   {"template", n.template_id ? Json(*n.template_id) : Json(nullptr)}});
  }
  return sha256_hex(canonical(doc).dump());
}

CompileResult compile(const PipelineDef& def, const OperatorRegistry& operators,
                      const TemplateRegistry& templates) {
  CompileReport report;
  auto diag = [&](DiagCode code, std::optional<std::size_t> node, std::string subject,
                  std::string message) {
    report.diagnostics.push_back(
        {Severity::kError, code, node, std::move(subject), std::move(message)});
  };

  std::map<std::string, ColumnInfo> table;
  for (const auto& c : def.initial_columns) table[c.name] = ColumnInfo{c.kind, std::nullopt};

  // Readers of each column since its last producer, for write-after-read order.
  std::map<std::string, std::vector<std::size_t>> readers;

  std::vector<PlanNode> nodes;
  std::vector<PlanEdge> edges;
  std::vector<std::pair<std::size_t, std::size_t>> order_edges;
  std::vector<const RegistryEntry*> entries(def.operators.size(), nullptr);

  for (std::size_t i = 0; i < def.operators.size(); ++i) {
    const auto& nd = def.operators[i];
    for (auto dep : nd.depends_on) {
      if (dep >= def.operators.size()) {
        diag(DiagCode::kBindingIncomplete, i, "depends_on",
             "depends_on names node " + std::to_string(dep) + ", which does not exist");
      } else {
        order_edges.emplace_back(dep, i);
      }
    }

    const RegistryEntry* entry = operators.find(nd.operator_name);
    if (entry == nullptr) {
      diag(DiagCode::kUnknownOperator, i, nd.operator_name,
           "operator '" + nd.operator_name + "' is not registered");
      continue;
    }
    entries[i] = entry;
    const auto& d = entry->descriptor;
    PlanNode node;
    node.index = i;
    node.entry = entry;
    node.binding = nd.bindings;
    node.config = nd.config;
    bool node_ok = true;

    for (const auto& p : check_binding(d, nd.bindings)) {
      diag(DiagCode::kBindingIncomplete, i, p.role, p.message);
      node_ok = false;
    }

    // Prompt template, serving and resources.
    if (nd.config.contains("template")) {
      if (!nd.config["template"].is_string()) {
        diag(DiagCode::kBindingIncomplete, i, "template", "template must be a string");
        node_ok = false;
      } else {
        node.template_id = nd.config["template"].get<std::string>();
      }
    } else if (!d.allowed_prompt_templates.empty()) {
      node.template_id = d.allowed_prompt_templates.front();
    }
    if (node.template_id) {
      try {
        bind_template(d, *node.template_id, templates);
      } catch (const Error& e) {
        diag(DiagCode::kBindingIncomplete, i, "template", e.what());
        node_ok = false;
      }
    }
    if (d.requires_serving && !def.serving) {
      diag(DiagCode::kBindingIncomplete, i, "serving",
           d.name + " requires serving but the pipeline declares none");
      node_ok = false;
    }
    for (const auto& res : d.resources) {
      if (!def.resources.contains(res)) {
        diag(DiagCode::kBindingIncomplete, i, res,
             d.name + " needs resource '" + res + "', which the pipeline does not declare");
        node_ok = false;
      }
    }

    // Inputs against the kind table.
    for (const auto& r : d.input_roles) {
      auto it = nd.bindings.find(r.name);
      if (it == nd.bindings.end()) continue;
      for (const auto& col : it->second) {
        if (col.empty()) continue;
        auto t = table.find(col);
        if (t == table.end()) {
          diag(DiagCode::kMissingColumn, i, col,
               d.name + " reads '" + col + "' (role " + r.name +
                   "), which no earlier node produces and is not an initial column");
          continue;
        }
        if (r.kind && t->second.kind && *r.kind != *t->second.kind) {
          diag(DiagCode::kKindMismatch, i, col,
               d.name + " role " + r.name + " expects " + kind_name(r.kind) + " but '" + col +
                   "' is " + kind_name(t->second.kind));
        }
        if (t->second.producer) {
          auto from = *t->second.producer;
          edges.push_back({from, i, col});
          const auto* up = entries[from];
          if (up != nullptr && up->descriptor.modality != d.modality &&
              !up->descriptor.converter) {
            bool seen = std::any_of(report.diagnostics.begin(), report.diagnostics.end(),
                                    [&](const Diagnostic& x) {
                                      return x.code == DiagCode::kModalityMismatch &&
                                             x.node == i && x.subject == up->descriptor.name;
                                    });
            if (!seen) {
              diag(DiagCode::kModalityMismatch, i, up->descriptor.name,
                   d.name + " (" + std::string(to_string(d.modality)) + ") consumes output of " +
                       up->descriptor.name + " (" +
                       std::string(to_string(up->descriptor.modality)) +
                       "), which is not a converter");
            }
          }
        }
        readers[col].push_back(i);
      }
    }

    // Outputs.
    bool overwrite = nd.config.value("overwrite", false);
    std::set<std::string> written;
    for (const auto& r : d.output_roles) {
      auto it = nd.bindings.find(r.name);
      if (it == nd.bindings.end() || it->second.size() != 1 || it->second.front().empty()) {
        continue;
      }
      const auto& col = it->second.front();
      if (!written.insert(col).second) continue;
      auto t = table.find(col);
      if (t != table.end()) {
        if (!r.in_place && !overwrite) {
          std::string by = t->second.producer
                               ? "node " + std::to_string(*t->second.producer)
                               : std::string("the input data");
          diag(DiagCode::kDuplicateProducer, i, col,
               d.name + " writes '" + col + "', already produced by " + by +
                   "; set \"overwrite\": true to replace it");
        }
        if (t->second.producer && *t->second.producer != i) {
          order_edges.emplace_back(*t->second.producer, i);
        }
        for (auto reader : readers[col]) {
          if (reader != i) order_edges.emplace_back(reader, i);
        }
      } else if (r.in_place) {
        diag(DiagCode::kBindingIncomplete, i, r.name,
             d.name + " rewrites '" + col + "' in place, but no such column exists");
        continue;
      }
      readers[col].clear();
      table[col] = ColumnInfo{r.kind, i};
    }

    if (node_ok) {
      OperatorConfig cfg;
      cfg.params = nd.config;
      cfg.template_id = node.template_id;
      cfg.templates = &templates;
      try {
        node.instance = entry->configure(cfg);
      } catch (const Error& e) {
        diag(DiagCode::kBindingIncomplete, i, "config", d.name + ": " + e.what());
      }
    }
    nodes.push_back(std::move(node));
  }

  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (const auto& e : edges) all.emplace_back(e.from, e.to);
  all.insert(all.end(), order_edges.begin(), order_edges.end());

  for (const auto& comp : cyclic_components(def.operators.size(), all)) {
    std::string names;
    for (auto n : comp) {
      if (!names.empty()) names += ", ";
      names += std::to_string(n);
    }
    diag(DiagCode::kCycle, comp.front(), "", "nodes " + names + " depend on each other");
  }

  if (!report.empty()) return report;

  CompiledPlan plan;
  plan.order_ = *topo_sort(def.operators.size(), all);
  plan.digest_ = plan_digest(nodes);
  plan.nodes_ = std::move(nodes);
  plan.edges_ = std::move(edges);
  plan.order_edges_ = std::move(order_edges);
  plan.kinds_ = std::move(table);
  plan.def_ = def;
  return plan;
}

}  // namespace dataprep
