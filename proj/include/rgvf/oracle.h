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

#ifndef RGVF_ORACLE_H_
#define RGVF_ORACLE_H_

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "rgvf/envs.h"
#include "rgvf/features.h"
#include "rgvf/qnet.h"

namespace rgvf::oracle {

// Solves (I - gamma * P_pi) v = r. gamma in [0, 1). Throws NumericError if
// the residual max-norm exceeds 1e-10.
Eigen::VectorXd true_values(const envs::ExactModel& model, double gamma);

// Plain synchronous value iteration for the same system, used as a cross-check.
Eigen::VectorXd value_iteration(const envs::ExactModel& model, double gamma,
                                double tolerance = 1e-13, int max_iterations = 100000);

// Max-norm of (I - gamma * P) v - r.
double value_residual(const envs::ExactModel& model, double gamma, const Eigen::VectorXd& v);

// Feature values for every (state, action). The room is deterministic, so
// the successor is implied.
struct FeatureTable {
  int num_features = 0;
  std::vector<std::vector<Eigen::VectorXd>> values;  // [state][action]
};

// Evaluates `features` on transitions rebuilt from the model's moves and the
// room's observations. Throws UnsupportedFeatureError when the feature
// function expects a different observation layout.
FeatureTable feature_table(const FeatureFunction& features, const envs::ExactModel& model);

struct GvfSolution {
  Eigen::MatrixXd values;  // states x prediction nodes
  double residual = 0.0;   // max-norm over the stacked fixed-point system
};

// Exact GVF values of every prediction node under the uniform random policy.
// Nodes are solved children-first; a node with a self-loop of weight g needs
// one linear solve with (I - g * P_node).
GvfSolution exact_gvf_values(const QuestionNetwork& net, const envs::ExactModel& model,
                             const FeatureTable& features);

// Max-norm residual of `values` in the stacked system y = T(y).
double gvf_residual(const QuestionNetwork& net, const envs::ExactModel& model,
                    const FeatureTable& features, const Eigen::MatrixXd& values);

// Draws an action for a state.
using Policy = std::function<int(int state, Rng& rng)>;
Policy uniform_policy();

struct MonteCarloEstimate {
  Eigen::MatrixXd mean;            // states x prediction nodes
  Eigen::MatrixXd standard_error;  // sample std / sqrt(samples)
  int samples_per_entry = 0;
};

// Rollout estimates of each node's target semantics, from simulator steps
// only. Each sample forces the node's action (if any), then follows the
// policy; prediction edges recurse into fresh samples of the child from the
// successor state, and a self-loop of weight g continues with probability g.
// This is unbiased for the discounted sums without truncation.
MonteCarloEstimate monte_carlo_gvf(const QuestionNetwork& net, const envs::EmptyRoom& env,
                                   const FeatureFunction& features, int samples_per_entry,
                                   std::uint64_t seed, const Policy& policy = uniform_policy());

}  // namespace rgvf::oracle

#endif  // RGVF_ORACLE_H_
