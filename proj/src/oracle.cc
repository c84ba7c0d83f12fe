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

#include "rgvf/oracle.h"

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include <Eigen/LU>

#include "rgvf/errors.h"

namespace rgvf::oracle {

namespace {

constexpr double kResidualTolerance = 1e-10;

void check_model(const envs::ExactModel& model) {
  if (model.num_states < 1 || model.num_actions < 1 ||
      static_cast<int>(model.moves.size()) != model.num_states) {
    throw ConfigError("exact model is empty or inconsistent");
  }
}

// Children-first order over non-self prediction edges. Throws on cycles.
std::vector<int> solve_order(const QuestionNetwork& net) {
  const int n = net.num_predictions();
  std::vector<int> order;
  std::vector<int> state(n, 0);
  for (int root = 0; root < n; ++root) {
    if (state[root]) continue;
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      const auto& edges = net.prediction(u).edges;
      if (next == edges.size()) {
        state[u] = 2;
        order.push_back(u);
        stack.pop_back();
        continue;
      }
      const NodeId t = edges[next++].target;
      if (t.is_feature() || t.index == u) continue;
      if (t.index < 0 || t.index >= n) throw ConfigError("question network has a dangling edge");
      if (state[t.index] == 1) throw ConfigError("question network has a cycle");
      if (state[t.index] == 0) {
        state[t.index] = 1;
        stack.emplace_back(t.index, 0);
      }
    }
  }
  return order;
}

// Action weights of a node: the policy, or all mass on the condition.
Eigen::VectorXd action_weights(const PredictionNode& node, int num_actions) {
  if (!node.condition) return Eigen::VectorXd::Constant(num_actions, 1.0 / num_actions);
  if (*node.condition < 0 || *node.condition >= num_actions) {
    throw ConfigError("node conditioned on action " + std::to_string(*node.condition) +
                      " outside the environment's action set");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(num_actions);
  w(*node.condition) = 1.0;
  return w;
}

// One application of node i's target operator at state s, with self-loop
// edges included when `include_self` is set.
double node_backup(const QuestionNetwork& net, int i, int s, const envs::ExactModel& model,
                   const FeatureTable& features, const Eigen::MatrixXd& values,
                   const Eigen::VectorXd& weights, bool include_self) {
  double total = 0.0;
  for (int a = 0; a < model.num_actions; ++a) {
    if (weights(a) == 0.0) continue;
    const int next = model.moves[s][a].next_state;
    double y = 0.0;
    for (const Edge& e : net.prediction(i).edges) {
      if (e.target.is_feature()) {
        y += e.weight * features.values[s][a](e.target.index);
      } else if (e.target.index != i || include_self) {
        y += e.weight * values(next, e.target.index);
      }
    }
    total += weights(a) * y;
  }
  return total;
}

}  // namespace

double value_residual(const envs::ExactModel& model, double gamma, const Eigen::VectorXd& v) {
  const Eigen::VectorXd r = v - gamma * model.policy_transition * v - model.policy_reward;
  return r.cwiseAbs().maxCoeff();
}

Eigen::VectorXd true_values(const envs::ExactModel& model, double gamma) {
  check_model(model);
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("true_values: gamma must lie in [0, 1)");
  const Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(model.num_states, model.num_states) - gamma * model.policy_transition;
  const Eigen::VectorXd v = a.partialPivLu().solve(model.policy_reward);
  const double res = value_residual(model, gamma, v);
  if (!(res < kResidualTolerance)) {
    throw NumericError("true_values: residual " + std::to_string(res) + " exceeds tolerance");
  }
  return v;
}

Eigen::VectorXd value_iteration(const envs::ExactModel& model, double gamma, double tolerance,
                                int max_iterations) {
  check_model(model);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(model.num_states);
  const double pi = 1.0 / model.num_actions;
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd next(model.num_states);
    for (int s = 0; s < model.num_states; ++s) {
      double total = 0.0;
      for (int a = 0; a < model.num_actions; ++a) {
        const envs::Move& m = model.moves[s][a];
        total += pi * (m.reward + gamma * v(m.next_state));
      }
      next(s) = total;
    }
    const double delta = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    if (delta < tolerance) return v;
  }
  throw NumericError("value_iteration: no convergence");
}

FeatureTable feature_table(const FeatureFunction& features, const envs::ExactModel& model) {
  check_model(model);
  if (!features.is_touch() && !(features.shape() == envs::EmptyRoom::observation_shape())) {
    throw UnsupportedFeatureError(
        "feature function expects a different observation layout than the room");
  }
  FeatureTable table;
  table.num_features = features.size();
  table.values.assign(model.num_states, std::vector<Eigen::VectorXd>(model.num_actions));
  for (int s = 0; s < model.num_states; ++s) {
    for (int a = 0; a < model.num_actions; ++a) {
      const envs::Move& m = model.moves[s][a];
      Transition t;
      t.observation = envs::EmptyRoom::observation_for(s);
      t.action = a;
      t.next_observation = envs::EmptyRoom::observation_for(m.next_state);
      t.blocked = m.blocked;
      t.reward = m.reward;
      table.values[s][a] = features(t);
    }
  }
  return table;
}

double gvf_residual(const QuestionNetwork& net, const envs::ExactModel& model,
                    const FeatureTable& features, const Eigen::MatrixXd& values) {
  double worst = 0.0;
  for (int i = 0; i < net.num_predictions(); ++i) {
    const Eigen::VectorXd w = action_weights(net.prediction(i), model.num_actions);
    for (int s = 0; s < model.num_states; ++s) {
      const double r =
          values(s, i) - node_backup(net, i, s, model, features, values, w, /*include_self=*/true);
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

GvfSolution exact_gvf_values(const QuestionNetwork& net, const envs::ExactModel& model,
                             const FeatureTable& features) {
  check_model(model);
  if (features.num_features != net.num_features()) {
    throw ShapeError("exact_gvf_values: network has " + std::to_string(net.num_features()) +
                     " features, table has " + std::to_string(features.num_features));
  }
  const int n_s = model.num_states;
  GvfSolution out;
  out.values = Eigen::MatrixXd::Zero(n_s, net.num_predictions());
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n_s, n_s);

  for (int i : solve_order(net)) {
    const PredictionNode& node = net.prediction(i);
    const Eigen::VectorXd w = action_weights(node, model.num_actions);
    Eigen::VectorXd b(n_s);
    for (int s = 0; s < n_s; ++s) {
      b(s) = node_backup(net, i, s, model, features, out.values, w, /*include_self=*/false);
    }
    const double loop = node.self_loop_weight(i);
    if (loop == 0.0) {
      out.values.col(i) = b;
      continue;
    }
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n_s, n_s);
    for (int a = 0; a < model.num_actions; ++a) p += w(a) * model.transition[a];
    const Eigen::MatrixXd system = identity - loop * p;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    if (!lu.isInvertible()) {
      throw NumericError("exact_gvf_values: singular system for prediction " + std::to_string(i));
    }
    out.values.col(i) = lu.solve(b);
  }
  out.residual = gvf_residual(net, model, features, out.values);
  if (!(out.residual < kResidualTolerance)) {
    throw NumericError("exact_gvf_values: residual " + std::to_string(out.residual) +
                       " exceeds tolerance");
  }
  return out;
}

Policy uniform_policy() {
  return [](int, Rng& rng) { return static_cast<int>(rng.uniform_index(envs::kNumActions)); };
}

namespace {

class Sampler {
 public:
  Sampler(const QuestionNetwork& net, const envs::EmptyRoom& env,
          const FeatureFunction& features, const Policy& policy, std::uint64_t seed)
      : net_(net), env_(env), features_(features), policy_(policy), rng_(seed) {}

  double sample(int node, int state) {
    const PredictionNode& p = net_.prediction(node);
    const double loop = p.self_loop_weight(node);
    double total = 0.0;
    for (long step = 0;; ++step) {
      if (step > kMaxSteps) throw NumericError("monte_carlo_gvf: rollout did not terminate");
      const int action = p.condition ? *p.condition : policy_(state, rng_);
      const auto& [next, f] = simulate(state, action);
      for (const Edge& e : p.edges) {
        if (e.target.is_feature()) {
          total += e.weight * f(e.target.index);
        } else if (e.target.index != node) {
          total += e.weight * sample(e.target.index, next);
        }
      }
      if (loop == 0.0 || !rng_.bernoulli(loop)) break;
      state = next;
    }
    return total;
  }

 private:
  static constexpr long kMaxSteps = 10'000'000;

  // Features depend on the transition only, so each (state, action) is
  // simulated once and remembered.
  const std::pair<int, Eigen::VectorXd>& simulate(int state, int action) {
    const auto key = std::make_pair(state, action);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    env_.set_state(state);
    const envs::StepResult r = env_.step(action);
    return cache_.emplace(key, std::make_pair(env_.state(), features_(r.transition)))
        .first->second;
  }

  const QuestionNetwork& net_;
  envs::EmptyRoom env_;
  const FeatureFunction& features_;
  const Policy& policy_;
  Rng rng_;
  std::map<std::pair<int, int>, std::pair<int, Eigen::VectorXd>> cache_;
};

}  // namespace

MonteCarloEstimate monte_carlo_gvf(const QuestionNetwork& net, const envs::EmptyRoom& env,
                                   const FeatureFunction& features, int samples_per_entry,
                                   std::uint64_t seed, const Policy& policy) {
  if (samples_per_entry < 1) throw ConfigError("monte_carlo_gvf: need at least one sample");
  if (features.size() != net.num_features()) {
    throw ShapeError("monte_carlo_gvf: feature count does not match the network");
  }
  solve_order(net);  // rejects cycles before sampling
  const int n_s = envs::EmptyRoom::kNumStates;
  const int n_p = net.num_predictions();
  MonteCarloEstimate out;
  out.samples_per_entry = samples_per_entry;
  out.mean = Eigen::MatrixXd::Zero(n_s, n_p);
  out.standard_error = Eigen::MatrixXd::Zero(n_s, n_p);
  Sampler sampler(net, env, features, policy, seed);
  for (int i = 0; i < n_p; ++i) {
    for (int s = 0; s < n_s; ++s) {
      // Welford running moments.
      double mean = 0.0, m2 = 0.0;
      for (int k = 1; k <= samples_per_entry; ++k) {
        const double x = sampler.sample(i, s);
        const double d = x - mean;
        mean += d / k;
        m2 += d * (x - mean);
      }
      out.mean(s, i) = mean;
      out.standard_error(s, i) =
          samples_per_entry > 1
              ? std::sqrt(m2 / (samples_per_entry - 1) / samples_per_entry)
              : 0.0;
    }
  }
  return out;
}

}  // namespace rgvf::oracle
