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

#include "rgvf/agent.h"

#include <string>

#include "rgvf/errors.h"
#include "rgvf/random.h"
#include "rgvf/targets.h"

namespace rgvf::agent {

AgentNet::AgentNet(int observation_size, int num_predictions, int num_actions,
                   const Architecture& arch, bool stop_gradient_flag, std::uint64_t seed)
    : stop_gradient(stop_gradient_flag), num_actions_(num_actions) {
  if (arch.repr_layers.empty()) throw ConfigError("representation needs at least one layer");
  if (num_predictions < 0 || num_actions < 0) throw ConfigError("negative head width");
  const std::vector<int> repr_hidden(arch.repr_layers.begin(), arch.repr_layers.end() - 1);
  const int state_size = arch.repr_layers.back();
  const std::vector<int> head_hidden{arch.head_hidden};

  Rng repr_rng(mix_seed(seed, 0));
  repr = nn::DenseNet::mlp(observation_size, repr_hidden, state_size, nn::Activation::kRelu,
                           repr_rng);
  Rng rl_rng(mix_seed(seed, 1));
  rl_head = nn::DenseNet::mlp(state_size, head_hidden, 1 + num_actions,
                              nn::Activation::kIdentity, rl_rng);
  if (num_predictions > 0) {
    Rng ans_rng(mix_seed(seed, 2));
    answer_head = nn::DenseNet::mlp(state_size, head_hidden, num_predictions,
                                    nn::Activation::kIdentity, ans_rng);
  }
}

AgentNet::AgentNet(nn::DenseNet repr_net, nn::DenseNet rl_net, nn::DenseNet answer_net,
                   int num_actions, bool stop_gradient_flag)
    : repr(std::move(repr_net)),
      rl_head(std::move(rl_net)),
      answer_head(std::move(answer_net)),
      stop_gradient(stop_gradient_flag),
      num_actions_(num_actions) {
  if (num_actions_ < 0 || rl_head.output_size() != 1 + num_actions_) {
    throw ShapeError("RL head width does not match the action count");
  }
  if (repr.output_size() != rl_head.input_size() ||
      (answer_head.output_size() > 0 && answer_head.input_size() != repr.output_size())) {
    throw ShapeError("agent module widths do not chain");
  }
}

AgentNet::Output AgentNet::predict(const Eigen::MatrixXd& observations) const {
  Output out;
  out.state = repr.forward(observations);
  const Eigen::MatrixXd rl = rl_head.forward(out.state);
  out.value = rl.col(0);
  if (num_actions_ > 0) out.policy_logits = rl.rightCols(num_actions_);
  if (answer_head.output_size() > 0) {
    out.answers = answer_head.forward(out.state);
  } else {
    out.answers.resize(observations.rows(), 0);
  }
  return out;
}

nlohmann::json to_json(const AgentNet& agent) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["stop_gradient"] = agent.stop_gradient;
  doc["num_actions"] = agent.num_actions();
  doc["repr"] = nn::to_json(agent.repr);
  doc["rl_head"] = nn::to_json(agent.rl_head);
  doc["answer_head"] = nn::to_json(agent.answer_head);
  return doc;
}

AgentNet agent_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("version").get<int>() != 1) throw ParseError("agent checkpoint: unsupported version");
    return AgentNet(nn::dense_net_from_json(doc.at("repr")),
                    nn::dense_net_from_json(doc.at("rl_head")),
                    nn::dense_net_from_json(doc.at("answer_head")),
                    doc.at("num_actions").get<int>(), doc.at("stop_gradient").get<bool>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("agent checkpoint: ") + e.what());
  } catch (const ShapeError& e) {
    throw ParseError(std::string("agent checkpoint: ") + e.what());
  }
}

Eigen::MatrixXd all_state_observations() {
  Eigen::MatrixXd obs(envs::EmptyRoom::kNumStates, envs::EmptyRoom::kObservationSize);
  for (int s = 0; s < envs::EmptyRoom::kNumStates; ++s) {
    obs.row(s) = envs::EmptyRoom::observation_for(s).transpose();
  }
  return obs;
}

double value_mse(const AgentNet& agent, const Eigen::VectorXd& truth) {
  const Eigen::VectorXd v = agent.predict(all_state_observations()).value;
  if (v.size() != truth.size()) throw ShapeError("value_mse: state count mismatch");
  return (v - truth).squaredNorm() / static_cast<double>(v.size());
}

Eigen::MatrixXd tabular_td(const QuestionNetwork& net, const FeatureFunction& features,
                           const TabularTdConfig& config) {
  if (config.steps < 1) throw ConfigError("tabular_td: steps must be positive");
  if (!(config.step_size > 0.0 && config.step_size <= 1.0)) {
    throw ConfigError("tabular_td: step_size must lie in (0, 1]");
  }
  if (features.size() != net.num_features()) {
    throw ShapeError("tabular_td: feature count does not match the network");
  }
  const int n_s = envs::EmptyRoom::kNumStates;
  const int n_p = net.num_predictions();
  const int n_a = envs::kNumActions;
  Eigen::MatrixXd answers = Eigen::MatrixXd::Zero(n_s, n_p);
  // Per-action entries of unconditioned nodes: row s * n_a + a.
  Eigen::MatrixXd per_action = Eigen::MatrixXd::Zero(n_s * n_a, n_p);
  std::vector<char> unconditioned(n_p);
  for (int i = 0; i < n_p; ++i) unconditioned[i] = !net.prediction(i).condition.has_value();

  envs::EmptyRoom env(config.room);
  Rng rng(config.seed);
  env.reset(rng.next_u64());
  const double alpha = config.step_size;
  for (long t = 0; t < config.steps; ++t) {
    const int s = env.state();
    const int a = static_cast<int>(rng.uniform_index(n_a));
    const envs::StepResult step = env.step(a);
    const int next = env.state();
    const TargetBatch batch =
        compute_targets(net, features(step.transition), answers.row(next).transpose(), a, false);
    for (int i = 0; i < n_p; ++i) {
      if (!batch.mask[i]) continue;
      if (unconditioned[i] && config.expected_over_actions) {
        double& q = per_action(s * n_a + a, i);
        q += alpha * (batch.targets(i) - q);
        answers(s, i) = per_action.block(s * n_a, i, n_a, 1).mean();
      } else {
        answers(s, i) += alpha * (batch.targets(i) - answers(s, i));
      }
    }
  }
  return answers;
}

}  // namespace rgvf::agent
