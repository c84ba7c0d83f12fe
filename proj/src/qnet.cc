// Copyright 2026 The rgvf Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rgvf/qnet.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include "rgvf/errors.h"
#include "rgvf/random.h"

namespace rgvf {

double PredictionNode::self_loop_weight(int self_index) const {
  double w = 0.0;
  for (const Edge& e : edges) {
    if (e.target == NodeId::prediction(self_index)) w += e.weight;
  }
  return w;
}

QuestionNetwork::QuestionNetwork(int n_features, std::vector<int> actions,
                                 std::vector<PredictionNode> predictions)
    : n_features_(n_features),
      actions_(std::move(actions)),
      predictions_(std::move(predictions)) {
  if (n_features_ < 0) throw ConfigError("n_features must be nonnegative");
}

std::optional<int> QuestionNetwork::action_index(int action_id) const {
  auto it = std::find(actions_.begin(), actions_.end(), action_id);
  if (it == actions_.end()) return std::nullopt;
  return static_cast<int>(it - actions_.begin());
}

int QuestionNetwork::depth() const {
  int d = 0;
  for (const auto& p : predictions_) d = std::max(d, p.layer);
  return d;
}

std::vector<int> QuestionNetwork::layer_sizes() const {
  std::vector<int> sizes(depth() + 1, 0);
  for (const auto& p : predictions_) {
    if (p.layer >= 0) ++sizes[p.layer];
  }
  return sizes;
}

QuestionNetwork make_discounted_sum(int n_features, double gamma) {
  if (n_features < 1) throw ConfigError("discounted sum: n_features must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ConfigError("discounted sum: gamma must lie in (0, 1]");
  }
  std::vector<PredictionNode> nodes(n_features);
  for (int k = 0; k < n_features; ++k) {
    nodes[k].layer = 0;
    nodes[k].edges = {{NodeId::feature(k), 1.0}, {NodeId::prediction(k), gamma}};
  }
  return QuestionNetwork(n_features, {}, std::move(nodes));
}

namespace {

void check_distinct_actions(std::span<const int> actions) {
  if (actions.empty()) throw ConfigError("action set must be nonempty");
  std::set<int> seen(actions.begin(), actions.end());
  if (seen.size() != actions.size()) throw ConfigError("action ids must be distinct");
}

}  // namespace

QuestionNetwork make_full_tree(std::span<const int> actions, int depth) {
  check_distinct_actions(actions);
  if (depth < 1) throw ConfigError("full tree: depth must be >= 1");

  std::vector<PredictionNode> nodes;
  std::vector<int> previous;  // prediction indices of the last tree level
  for (int level = 1; level <= depth; ++level) {
    std::vector<int> current;
    for (int a : actions) {
      if (level == 1) {
        PredictionNode node;
        node.layer = 1;
        node.condition = a;
        node.edges = {{NodeId::feature(0), 1.0}};
        current.push_back(static_cast<int>(nodes.size()));
        nodes.push_back(std::move(node));
        continue;
      }
      for (int parent : previous) {
        PredictionNode node;
        node.layer = level;
        node.condition = a;
        node.edges = {{NodeId::prediction(parent), 1.0}, {NodeId::feature(0), 1.0}};
        current.push_back(static_cast<int>(nodes.size()));
        nodes.push_back(std::move(node));
      }
    }
    previous = std::move(current);
  }
  return QuestionNetwork(1, std::vector<int>(actions.begin(), actions.end()),
                         std::move(nodes));
}

void check_generator_config(const GeneratorConfig& c) {
  if (c.n_features < 1) throw ConfigError("generator: n_features must be >= 1");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) {
    throw ConfigError("generator: gamma must lie in (0, 1]");
  }
  check_distinct_actions(c.actions);
  if (c.depth < 0) throw ConfigError("generator: depth must be >= 0");
  if (c.repeat < 1) throw ConfigError("generator: repeat must be >= 1");
  if (c.depth > 0 && c.repeat > 2 * c.n_features) {
    std::ostringstream msg;
    msg << "generator: infeasible sampling at layer 1: repeat " << c.repeat
        << " exceeds the " << 2 * c.n_features << " available leaves";
    throw ConfigError(msg.str());
  }
}

std::int64_t generated_prediction_count(const GeneratorConfig& c) {
  return static_cast<std::int64_t>(c.n_features) +
         static_cast<std::int64_t>(c.depth) * c.repeat *
             static_cast<std::int64_t>(c.actions.size());
}

QuestionNetwork generate_random(const GeneratorConfig& config) {
  check_generator_config(config);
  Rng rng(config.seed);

  std::vector<PredictionNode> nodes;
  std::vector<NodeId> roots;
  std::vector<NodeId> leaves;
  for (int k = 0; k < config.n_features; ++k) {
    const NodeId f = NodeId::feature(k);
    const NodeId v = NodeId::prediction(static_cast<int>(nodes.size()));
    roots.push_back(f);
    leaves.push_back(f);
    leaves.push_back(v);
    PredictionNode node;
    node.layer = 0;
    node.edges = {{f, 1.0}, {v, config.gamma}};
    nodes.push_back(std::move(node));
  }

  for (int layer = 1; layer <= config.depth; ++layer) {
    if (static_cast<std::size_t>(config.repeat) > leaves.size()) {
      std::ostringstream msg;
      msg << "generator: infeasible sampling at layer " << layer << ": repeat "
          << config.repeat << " exceeds " << leaves.size() << " leaves";
      throw ConfigError(msg.str());
    }
    std::vector<NodeId> expanded;
    for (int a : config.actions) {
      // Fisher-Yates prefix of a fresh copy: R parents without replacement.
      std::vector<NodeId> pool = leaves;
      for (int i = 0; i < config.repeat; ++i) {
        const auto j = i + rng.uniform_index(pool.size() - i);
        std::swap(pool[i], pool[j]);
      }
      for (int i = 0; i < config.repeat; ++i) {
        const NodeId v = NodeId::prediction(static_cast<int>(nodes.size()));
        const NodeId root = roots[rng.uniform_index(roots.size())];
        PredictionNode node;
        node.layer = layer;
        node.condition = a;
        node.edges = {{pool[i], 1.0}, {root, 1.0}};
        nodes.push_back(std::move(node));
        expanded.push_back(v);
      }
    }
    leaves = std::move(expanded);
  }
  return QuestionNetwork(config.n_features, config.actions, std::move(nodes));
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream out;
  for (const auto& v : violations) {
    if (v.node >= 0) out << "prediction " << v.node << ": ";
    out << v.message << "\n";
  }
  return out.str();
}

ValidationReport validate(const QuestionNetwork& net) {
  ValidationReport report;
  auto add = [&report](ViolationKind kind, int node, std::string message) {
    report.violations.push_back({kind, node, std::move(message)});
  };
  const int n_p = net.num_predictions();
  const int n_f = net.num_features();

  for (int i = 0; i < n_p; ++i) {
    const auto& node = net.prediction(i);
    if (node.layer < 0) add(ViolationKind::kDanglingReference, i, "negative layer index");
    if (node.edges.empty()) add(ViolationKind::kMissingEdges, i, "no outgoing edges");
    if (node.condition && !net.action_index(*node.condition)) {
      add(ViolationKind::kUnknownAction, i,
          "conditioned on unknown action " + std::to_string(*node.condition));
    }
    for (const Edge& e : node.edges) {
      const int limit = e.target.is_feature() ? n_f : n_p;
      if (e.target.index < 0 || e.target.index >= limit) {
        add(ViolationKind::kDanglingReference, i,
            std::string("edge to missing ") +
                (e.target.is_feature() ? "feature " : "prediction ") +
                std::to_string(e.target.index));
        continue;
      }
      const bool self = e.target == NodeId::prediction(i);
      if (self && node.layer != 0) {
        add(ViolationKind::kIllegalSelfLoop, i, "self-loop outside layer 0");
      }
      const bool weight_ok = std::isfinite(e.weight) &&
                             (self ? (e.weight > 0.0 && e.weight <= 1.0) : e.weight == 1.0);
      if (!weight_ok) {
        std::ostringstream msg;
        msg << "edge weight " << e.weight << " outside {1, gamma}";
        add(ViolationKind::kBadWeight, i, msg.str());
      }
    }
  }

  // Cycles among prediction nodes once self-loops are removed.
  std::vector<int> color(n_p, 0);  // 0 new, 1 on stack, 2 done
  std::vector<char> on_cycle(n_p, 0);
  for (int start = 0; start < n_p; ++start) {
    if (color[start]) continue;
    std::vector<std::pair<int, std::size_t>> stack{{start, 0}};
    color[start] = 1;
    while (!stack.empty()) {
      auto& [u, next_edge] = stack.back();
      const auto& edges = net.prediction(u).edges;
      if (next_edge == edges.size()) {
        color[u] = 2;
        stack.pop_back();
        continue;
      }
      const NodeId t = edges[next_edge++].target;
      if (t.is_feature() || t.index == u || t.index < 0 || t.index >= n_p) continue;
      if (color[t.index] == 1) {
        on_cycle[t.index] = 1;
      } else if (color[t.index] == 0) {
        color[t.index] = 1;
        stack.emplace_back(t.index, 0);
      }
    }
  }
  for (int i = 0; i < n_p; ++i) {
    if (on_cycle[i]) add(ViolationKind::kCycle, i, "cycle through non-self-loop edges");
  }

  // Grounding: least fixed point of "has a feature edge or an edge to a
  // grounded prediction".
  std::vector<char> grounded(n_p, 0);
  for (bool changed = true; changed;) {
    changed = false;
    for (int i = 0; i < n_p; ++i) {
      if (grounded[i]) continue;
      for (const Edge& e : net.prediction(i).edges) {
        const NodeId t = e.target;
        const bool hit = t.is_feature()
                             ? (t.index >= 0 && t.index < n_f)
                             : (t.index != i && t.index >= 0 && t.index < n_p && grounded[t.index]);
        if (hit) {
          grounded[i] = 1;
          changed = true;
          break;
        }
      }
    }
  }
  for (int i = 0; i < n_p; ++i) {
    if (!grounded[i]) add(ViolationKind::kNotGrounded, i, "does not reach any feature node");
  }

  // Two nodes of one layer conditioned on one action may not share a parent
  // prediction node.
  std::map<std::tuple<int, int, int>, int> parent_owner;
  for (int i = 0; i < n_p; ++i) {
    const auto& node = net.prediction(i);
    if (!node.condition) continue;
    for (const Edge& e : node.edges) {
      if (e.target.is_feature() || e.target.index == i) continue;
      auto key = std::make_tuple(node.layer, *node.condition, e.target.index);
      auto [it, inserted] = parent_owner.emplace(key, i);
      if (!inserted && it->second != i) {
        add(ViolationKind::kDuplicatePrediction, i,
            "duplicate prediction: shares parent " + std::to_string(e.target.index) +
                " with prediction " + std::to_string(it->second));
      }
    }
  }
  return report;
}

QuestionNetwork canonicalize(const QuestionNetwork& net) {
  const int n_p = net.num_predictions();
  std::vector<int> order(n_p);
  std::iota(order.begin(), order.end(), 0);
  auto key = [&net](int i) {
    const auto& node = net.prediction(i);
    int action_pos = -1;
    if (node.condition) {
      action_pos = net.action_index(*node.condition).value_or(
          static_cast<int>(net.actions().size()));
    }
    return std::make_pair(node.layer, action_pos);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&key](int a, int b) { return key(a) < key(b); });
  std::vector<int> new_index(n_p);
  for (int pos = 0; pos < n_p; ++pos) new_index[order[pos]] = pos;

  std::vector<PredictionNode> nodes;
  nodes.reserve(n_p);
  for (int old : order) {
    PredictionNode node = net.prediction(old);
    for (Edge& e : node.edges) {
      if (!e.target.is_feature() && e.target.index >= 0 && e.target.index < n_p) {
        e.target.index = new_index[e.target.index];
      }
    }
    nodes.push_back(std::move(node));
  }
  return QuestionNetwork(net.num_features(), net.actions(), std::move(nodes));
}

}  // namespace rgvf
