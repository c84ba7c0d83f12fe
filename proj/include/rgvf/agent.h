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

#ifndef RGVF_AGENT_H_
#define RGVF_AGENT_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "rgvf/envs.h"
#include "rgvf/features.h"
#include "rgvf/nn.h"
#include "rgvf/qnet.h"

namespace rgvf::agent {

struct Architecture {
  std::vector<int> repr_layers = {64, 64, 32};  // ReLU after each, last is |S_t|
  int head_hidden = 32;
};

// Representation module, RL head (value, then optional policy logits) and
// answer head, as in an auxiliary-task actor-critic agent.
class AgentNet {
 public:
  struct Output {
    Eigen::MatrixXd state;          // S_t, one row per observation
    Eigen::VectorXd value;          // v(S_t)
    Eigen::MatrixXd answers;        // one column per prediction node
    Eigen::MatrixXd policy_logits;  // empty without a policy head
  };

  AgentNet() = default;
  // num_predictions == 0 builds no answer head; num_actions == 0 builds no
  // policy head. Each module draws its initial weights from its own stream.
  AgentNet(int observation_size, int num_predictions, int num_actions,
           const Architecture& arch, bool stop_gradient, std::uint64_t seed);
  // Assembles already-built modules; throws ShapeError if widths do not chain.
  AgentNet(nn::DenseNet repr_net, nn::DenseNet rl_net, nn::DenseNet answer_net, int num_actions,
           bool stop_gradient);

  // Pure forward pass. stop_gradient has no effect here.
  Output predict(const Eigen::MatrixXd& observations) const;

  int num_predictions() const { return answer_head.output_size(); }
  int num_actions() const { return num_actions_; }

  nn::DenseNet repr;
  nn::DenseNet rl_head;
  nn::DenseNet answer_head;
  bool stop_gradient = true;

 private:
  int num_actions_ = 0;
};

// Gradients of one backward pass through the agent, one entry per module.
// repr_from_rl is empty when the RL loss does not reach the representation.
struct AgentGradients {
  nn::Gradients repr_from_rl;
  nn::Gradients rl_head;
  nn::Gradients repr_from_answers;
  nn::Gradients answer_head;
};

// Taped forward pass over a batch, kept for the matching backward pass.
class AgentPass {
 public:
  AgentPass(const AgentNet& agent, const Eigen::MatrixXd& observations, bool with_answers);

  const Eigen::MatrixXd& state() const { return state_; }
  const Eigen::MatrixXd& rl_out() const { return rl_out_; }  // value, then logits
  const Eigen::MatrixXd& answers() const { return answers_; }

  // Backpropagates output gradients. The RL gradient reaches the
  // representation only when stop_gradient is off; neither loss reaches it
  // when repr_trainable is false. An empty answer_grad skips the answer head.
  AgentGradients backward(const Eigen::MatrixXd& rl_out_grad, const Eigen::MatrixXd& answer_grad,
                          bool repr_trainable) const;

 private:
  const AgentNet* agent_;
  nn::Tape tape_repr_, tape_rl_, tape_ans_;
  Eigen::MatrixXd state_, rl_out_, answers_;
};

nlohmann::json to_json(const AgentNet& agent);
AgentNet agent_from_json(const nlohmann::json& doc);

enum class Representation { kLearned, kFrozen };
enum class OptimizerKind { kAdam, kRmsProp };

struct TrainConfig {
  int n_actors = 8;
  int rollout_len = 8;  // steps per actor between updates
  double gamma_env = 0.98;
  double lr_rl = 1e-3;
  double lr_answer = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  long total_frames = 1'000'000;
  long eval_period = 20'000;
  std::uint64_t seed = 0;
  double answer_mix = 1.0;  // c: answer learning-rate scale, end-to-end only
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.0;  // 0 disables RL gradient clipping
  bool stop_gradient = true;
  Representation representation = Representation::kLearned;
  Architecture arch;
  envs::RoomConfig room;
};

// Throws ConfigError listing every offending field.
void check_train_config(const TrainConfig& config);

// The question network and the features its feature nodes read.
struct AuxiliaryTask {
  QuestionNetwork net;
  FeatureFunction features;
};

struct MetricsRow {
  long frames = 0;
  double value_mse = 0.0;
  double answer_loss = 0.0;  // mean over updates since the previous row
  double policy_entropy = std::numeric_limits<double>::quiet_NaN();
  double return_value = std::numeric_limits<double>::quiet_NaN();
};

using MetricsSink = std::function<void(const MetricsRow&)>;

struct TrainResult {
  std::vector<MetricsRow> metrics;
  AgentNet agent;
};

// TD policy evaluation of the uniform random policy with synchronized
// actors. value_mse is measured against the exact values over every state.
TrainResult evaluate_policy_train(const AuxiliaryTask* task, const TrainConfig& config,
                                  const MetricsSink& sink = {});

// Advantage actor-critic on the room's goal reward with n-step returns over
// each rollout. value_mse compares v with the exact values of the current
// softmax policy. return_value is the mean reward per frame since the
// previous row divided by (1 - gamma_env); NaN on the first row. For the
// uniform policy its expectation is the mean of the exact state values.
TrainResult actor_critic_train(const AuxiliaryTask* task, const TrainConfig& config,
                               const MetricsSink& sink = {});

// Exact values of the softmax policy given one row of logits per state.
Eigen::VectorXd policy_values(const envs::ExactModel& model, const Eigen::MatrixXd& logits,
                              double gamma);

// Mean over the 49 states of (v(s) - truth(s))^2.
double value_mse(const AgentNet& agent, const Eigen::VectorXd& truth);

// Observations of all room states, one row per state index.
Eigen::MatrixXd all_state_observations();

struct TabularTdConfig {
  long steps = 1'000'000;
  double step_size = 0.5;
  // Unconditioned nodes keep one entry per action and report their policy
  // average, which removes action-sampling noise from their targets.
  bool expected_over_actions = true;
  std::uint64_t seed = 0;
  envs::RoomConfig room;
};

// One answer entry per (state, node), updated from compute_targets along a
// single random-policy trajectory. Returns states x nodes.
Eigen::MatrixXd tabular_td(const QuestionNetwork& net, const FeatureFunction& features,
                           const TabularTdConfig& config);

}  // namespace rgvf::agent

#endif  // RGVF_AGENT_H_
