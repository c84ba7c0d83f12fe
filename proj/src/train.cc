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

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "rgvf/agent.h"
#include "rgvf/errors.h"
#include "rgvf/oracle.h"
#include "rgvf/targets.h"

namespace rgvf::agent {

void check_train_config(const TrainConfig& c) {
  std::vector<std::string> bad;
  auto need = [&bad](bool ok, const char* field) {
    if (!ok) bad.emplace_back(field);
  };
  need(c.n_actors >= 1, "n_actors");
  need(c.rollout_len >= 1, "rollout_len");
  need(c.gamma_env >= 0.0 && c.gamma_env < 1.0, "gamma_env");
  need(c.lr_rl >= 0.0 && std::isfinite(c.lr_rl), "lr_rl");
  need(c.lr_answer >= 0.0 && std::isfinite(c.lr_answer), "lr_answer");
  need(c.total_frames >= 1, "total_frames");
  need(c.eval_period >= 1, "eval_period");
  need(c.answer_mix >= 0.0, "answer_mix");
  need(c.entropy_coef >= 0.0, "entropy_coef");
  need(c.value_coef >= 0.0, "value_coef");
  need(c.max_grad_norm >= 0.0, "max_grad_norm");
  bool arch_ok = !c.arch.repr_layers.empty() && c.arch.head_hidden >= 1;
  for (int w : c.arch.repr_layers) arch_ok = arch_ok && w >= 1;
  need(arch_ok, "arch");
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "invalid training config fields:";
    for (const auto& f : bad) msg << " " << f;
    throw ConfigError(msg.str());
  }
}

AgentPass::AgentPass(const AgentNet& agent, const Eigen::MatrixXd& observations,
                     bool with_answers)
    : agent_(&agent) {
  state_ = agent.repr.forward(observations, &tape_repr_);
  rl_out_ = agent.rl_head.forward(state_, &tape_rl_);
  if (with_answers && agent.num_predictions() > 0) {
    answers_ = agent.answer_head.forward(state_, &tape_ans_);
  }
}

AgentGradients AgentPass::backward(const Eigen::MatrixXd& rl_out_grad,
                                   const Eigen::MatrixXd& answer_grad,
                                   bool repr_trainable) const {
  AgentGradients g;
  const bool rl_into_repr = repr_trainable && !agent_->stop_gradient;
  Eigen::MatrixXd d_state;
  g.rl_head = agent_->rl_head.backward(tape_rl_, rl_out_grad, rl_into_repr ? &d_state : nullptr);
  if (rl_into_repr) g.repr_from_rl = agent_->repr.backward(tape_repr_, d_state);
  if (answer_grad.size() > 0) {
    if (answers_.size() == 0) throw ShapeError("AgentPass: answers were not computed");
    g.answer_head = agent_->answer_head.backward(tape_ans_, answer_grad,
                                                 repr_trainable ? &d_state : nullptr);
    if (repr_trainable) g.repr_from_answers = agent_->repr.backward(tape_repr_, d_state);
  }
  return g;
}

namespace {

nn::OptimizerConfig make_optimizer(OptimizerKind kind, double lr) {
  if (kind == OptimizerKind::kAdam) {
    nn::AdamConfig c;
    c.learning_rate = lr;
    return c;
  }
  nn::RmsPropConfig c;
  c.learning_rate = lr;
  return c;
}

void check_task(const AuxiliaryTask* task) {
  if (!task) return;
  if (task->features.size() != task->net.num_features()) {
    throw ConfigError("feature count " + std::to_string(task->features.size()) +
                      " does not match the question network's " +
                      std::to_string(task->net.num_features()) + " feature nodes");
  }
  if (!task->features.is_touch() &&
      !(task->features.shape() == envs::EmptyRoom::observation_shape())) {
    throw ConfigError("features expect a different observation layout than the room");
  }
  const ValidationReport report = validate(task->net);
  if (!report.ok()) throw ConfigError("invalid question network:\n" + report.to_string());
  for (int a : task->net.actions()) {
    if (a < 0 || a >= envs::kNumActions) {
      throw ConfigError("question network uses action " + std::to_string(a) +
                        " outside the room's action set");
    }
  }
}

// Observations, actions and features of one synchronized rollout. Row
// t * n_actors + i holds actor i at step t.
struct Rollout {
  Eigen::MatrixXd observations;  // (T + 1) * n rows
  Eigen::VectorXd rewards;       // T * n
  std::vector<int> actions;      // T * n
  Eigen::MatrixXd features;      // T * n rows; empty without a task
};

class Learner {
 public:
  Learner(const AuxiliaryTask* task, const TrainConfig& config, int num_actions)
      : task_(task),
        config_(config),
        agent_(envs::EmptyRoom::kObservationSize, task ? task->net.num_predictions() : 0,
               num_actions, config.arch, config.stop_gradient, mix_seed(config.seed, 1)),
        rl_opt_(make_optimizer(config.optimizer, config.lr_rl)),
        ans_opt_(make_optimizer(config.optimizer, config.lr_answer)) {}

  AgentNet& agent() { return agent_; }

  // rl_grad(rl_out, rl_out_last) returns d L_RL / d rl_out for the first
  // T * n rows; rl_out_last holds the RL head on the final observations.
  // Returns the answer loss, averaged over samples.
  template <typename RlGrad>
  double update(const Rollout& ro, RlGrad&& rl_grad) {
    const int n = config_.n_actors;
    const int batch = n * config_.rollout_len;
    const bool repr_trainable = config_.representation == Representation::kLearned;

    const AgentPass pass(agent_, ro.observations.topRows(batch), task_ != nullptr);
    const Eigen::MatrixXd state_last = agent_.repr.forward(ro.observations.bottomRows(n));
    const Eigen::MatrixXd rl_last = agent_.rl_head.forward(state_last);
    const Eigen::MatrixXd rl_out_grad = rl_grad(pass.rl_out(), rl_last);

    double loss = 0.0;
    Eigen::MatrixXd answer_grad;
    if (task_) {
      const Eigen::MatrixXd& answers = pass.answers();
      const Eigen::MatrixXd answers_last = agent_.answer_head.forward(state_last);
      answer_grad.resize(batch, answers.cols());
      for (int k = 0; k < batch; ++k) {
        const Eigen::VectorXd next = k + n < batch ? answers.row(k + n).transpose()
                                                   : answers_last.row(k + n - batch).transpose();
        const TargetBatch targets = compute_targets(task_->net, ro.features.row(k).transpose(),
                                                    next, ro.actions[k], false);
        const AnswerLoss l = answer_loss(answers.row(k).transpose(), targets);
        loss += l.loss / batch;
        answer_grad.row(k) = l.gradient.transpose() / batch;
      }
    }
    AgentGradients g = pass.backward(rl_out_grad, answer_grad, repr_trainable);

    std::vector<nn::DenseNet*> rl_nets{&agent_.rl_head};
    std::vector<nn::Gradients> rl_grads{std::move(g.rl_head)};
    if (!g.repr_from_rl.weight.empty()) {
      rl_nets.push_back(&agent_.repr);
      rl_grads.push_back(std::move(g.repr_from_rl));
    }
    if (config_.max_grad_norm > 0.0) nn::clip_global_norm(rl_grads, config_.max_grad_norm);

    std::vector<nn::DenseNet*> ans_nets;
    std::vector<nn::Gradients> ans_grads;
    if (task_) {
      ans_nets.push_back(&agent_.answer_head);
      ans_grads.push_back(std::move(g.answer_head));
      if (repr_trainable) {
        ans_nets.push_back(&agent_.repr);
        ans_grads.push_back(std::move(g.repr_from_answers));
      }
    }

    rl_opt_.step(rl_nets, rl_grads);
    if (task_) ans_opt_.step(ans_nets, ans_grads, agent_.stop_gradient ? 1.0 : config_.answer_mix);
    return loss;
  }

 private:
  const AuxiliaryTask* task_;
  const TrainConfig& config_;
  AgentNet agent_;
  nn::Optimizer rl_opt_;
  nn::Optimizer ans_opt_;
};

// Emits a metrics row at frame 0, whenever an eval period boundary is
// crossed, and at the end.
class EvalClock {
 public:
  explicit EvalClock(const TrainConfig& c) : period_(c.eval_period), total_(c.total_frames) {}

  bool due(long frames) const { return frames >= next_ || frames >= total_; }
  void mark(long frames) {
    while (next_ <= frames) next_ += period_;
  }

 private:
  long period_;
  long total_;
  long next_ = 0;
};

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double m = p.row(r).maxCoeff();
    p.row(r) = (p.row(r).array() - m).exp().matrix();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

double row_entropy(const Eigen::MatrixXd& p, Eigen::Index r) {
  double h = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    if (p(r, j) > 0.0) h -= p(r, j) * std::log(p(r, j));
  }
  return h;
}

}  // namespace

Eigen::VectorXd policy_values(const envs::ExactModel& model, const Eigen::MatrixXd& logits,
                              double gamma) {
  if (logits.rows() != model.num_states || logits.cols() != model.num_actions) {
    throw ShapeError("policy logits must be states x actions");
  }
  const Eigen::MatrixXd pi = softmax_rows(logits);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(model.num_states, model.num_states);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(model.num_states);
  for (int s = 0; s < model.num_states; ++s) {
    for (int a = 0; a < model.num_actions; ++a) {
      p(s, model.moves[s][a].next_state) += pi(s, a);
      r(s) += pi(s, a) * model.moves[s][a].reward;
    }
  }
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(model.num_states, model.num_states) - gamma * p;
  return system.partialPivLu().solve(r);
}

TrainResult evaluate_policy_train(const AuxiliaryTask* task, const TrainConfig& config,
                                  const MetricsSink& sink) {
  check_train_config(config);
  check_task(task);
  const envs::EmptyRoom room(config.room);
  const Eigen::VectorXd truth = oracle::true_values(envs::exact_model(room), config.gamma_env);

  Learner learner(task, config, 0);
  envs::VectorEnv env(config.n_actors, mix_seed(config.seed, 2), config.room);
  const int n = config.n_actors;
  const int steps = config.rollout_len;
  const int batch = n * steps;

  TrainResult result;
  EvalClock clock(config);
  double loss_sum = 0.0;
  long loss_count = 0;
  long frames = 0;
  auto emit = [&] {
    MetricsRow row;
    row.frames = frames;
    row.value_mse = value_mse(learner.agent(), truth);
    row.answer_loss = loss_count ? loss_sum / loss_count : 0.0;
    if (!std::isfinite(row.value_mse)) throw NumericError("training diverged: value MSE is not finite");
    result.metrics.push_back(row);
    if (sink) sink(row);
    loss_sum = 0.0;
    loss_count = 0;
    clock.mark(frames);
  };

  Rollout ro;
  ro.observations.resize((steps + 1) * n, envs::EmptyRoom::kObservationSize);
  ro.rewards.resize(batch);
  ro.actions.resize(batch);
  if (task) ro.features.resize(batch, task->net.num_features());

  ro.observations.bottomRows(n) = env.reset();
  emit();
  while (frames < config.total_frames) {
    ro.observations.topRows(n) = ro.observations.bottomRows(n);
    for (int t = 0; t < steps; ++t) {
      const std::vector<int> actions = env.sample_uniform_actions();
      const envs::VectorEnv::BatchStep step = env.step(actions);
      ro.observations.middleRows((t + 1) * n, n) = step.observations;
      for (int i = 0; i < n; ++i) {
        ro.rewards(t * n + i) = step.rewards(i);
        ro.actions[t * n + i] = actions[i];
        if (task) ro.features.row(t * n + i) = task->features(step.transitions[i]).transpose();
      }
    }
    const double gamma = config.gamma_env;
    loss_sum += learner.update(ro, [&](const Eigen::MatrixXd& out, const Eigen::MatrixXd& last) {
      Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(out.rows(), out.cols());
      for (int k = 0; k < batch; ++k) {
        const double next_value = k + n < batch ? out(k + n, 0) : last(k + n - batch, 0);
        const double target = ro.rewards(k) + gamma * next_value;
        grad(k, 0) = 2.0 * (out(k, 0) - target) / batch;
      }
      return grad;
    });
    ++loss_count;
    frames += batch;
    if (clock.due(frames)) emit();
  }
  result.agent = learner.agent();
  return result;
}

TrainResult actor_critic_train(const AuxiliaryTask* task, const TrainConfig& config,
                               const MetricsSink& sink) {
  check_train_config(config);
  check_task(task);
  const envs::EmptyRoom room(config.room);
  const envs::ExactModel model = envs::exact_model(room);
  const Eigen::MatrixXd all_obs = all_state_observations();

  Learner learner(task, config, envs::kNumActions);
  envs::VectorEnv env(config.n_actors, mix_seed(config.seed, 2), config.room);
  const int n = config.n_actors;
  const int steps = config.rollout_len;
  const int batch = n * steps;
  const int n_a = envs::kNumActions;

  TrainResult result;
  EvalClock clock(config);
  double loss_sum = 0.0, entropy_sum = 0.0, reward_sum = 0.0;
  long loss_count = 0, entropy_count = 0, reward_count = 0;
  long frames = 0;
  auto emit = [&] {
    const AgentNet::Output out = learner.agent().predict(all_obs);
    const Eigen::MatrixXd pi = softmax_rows(out.policy_logits);
    const Eigen::VectorXd v = policy_values(model, out.policy_logits, config.gamma_env);
    MetricsRow row;
    row.frames = frames;
    row.value_mse = (out.value - v).squaredNorm() / model.num_states;
    row.answer_loss = loss_count ? loss_sum / loss_count : 0.0;
    double h0 = 0.0;
    for (int s = 0; s < model.num_states; ++s) h0 += row_entropy(pi, s) / model.num_states;
    row.policy_entropy = entropy_count ? entropy_sum / entropy_count : h0;
    // Discounted return rate: per-frame reward since the last row / (1 - gamma).
    if (reward_count) row.return_value = reward_sum / reward_count / (1.0 - config.gamma_env);
    if (!std::isfinite(row.value_mse)) throw NumericError("training diverged: value MSE is not finite");
    result.metrics.push_back(row);
    if (sink) sink(row);
    loss_sum = entropy_sum = reward_sum = 0.0;
    loss_count = entropy_count = reward_count = 0;
    clock.mark(frames);
  };

  Rollout ro;
  ro.observations.resize((steps + 1) * n, envs::EmptyRoom::kObservationSize);
  ro.rewards.resize(batch);
  ro.actions.resize(batch);
  if (task) ro.features.resize(batch, task->net.num_features());

  ro.observations.bottomRows(n) = env.reset();
  emit();
  while (frames < config.total_frames) {
    ro.observations.topRows(n) = ro.observations.bottomRows(n);
    for (int t = 0; t < steps; ++t) {
      const AgentNet& agent = learner.agent();
      const Eigen::MatrixXd logits =
          agent.rl_head.forward(agent.repr.forward(ro.observations.middleRows(t * n, n)))
              .rightCols(n_a);
      const Eigen::MatrixXd pi = softmax_rows(logits);
      std::vector<int> actions(n);
      for (int i = 0; i < n; ++i) {
        const double u = env.actor_rng(i).uniform();
        double acc = 0.0;
        actions[i] = n_a - 1;
        for (int a = 0; a < n_a; ++a) {
          acc += pi(i, a);
          if (u < acc) {
            actions[i] = a;
            break;
          }
        }
      }
      const envs::VectorEnv::BatchStep step = env.step(actions);
      ro.observations.middleRows((t + 1) * n, n) = step.observations;
      for (int i = 0; i < n; ++i) {
        ro.rewards(t * n + i) = step.rewards(i);
        ro.actions[t * n + i] = actions[i];
        if (task) ro.features.row(t * n + i) = task->features(step.transitions[i]).transpose();
      }
    }
    loss_sum += learner.update(ro, [&](const Eigen::MatrixXd& out, const Eigen::MatrixXd& last) {
      // n-step returns bootstrapped from the value of the final observation.
      Eigen::VectorXd returns(batch);
      for (int i = 0; i < n; ++i) {
        double ret = last(i, 0);
        for (int t = steps - 1; t >= 0; --t) {
          ret = ro.rewards(t * n + i) + config.gamma_env * ret;
          returns(t * n + i) = ret;
        }
      }
      const Eigen::MatrixXd pi = softmax_rows(out.rightCols(n_a));
      Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(out.rows(), out.cols());
      for (int k = 0; k < batch; ++k) {
        const double advantage = returns(k) - out(k, 0);
        grad(k, 0) = config.value_coef * 2.0 * (out(k, 0) - returns(k)) / batch;
        const double h = row_entropy(pi, k);
        entropy_sum += h / batch;
        for (int a = 0; a < n_a; ++a) {
          const double p = pi(k, a);
          const double log_p = std::log(std::max(p, 1e-300));
          const double pg = (p - (a == ro.actions[k] ? 1.0 : 0.0)) * advantage;
          const double ent = config.entropy_coef * p * (log_p + h);
          grad(k, 1 + a) = (pg + ent) / batch;
        }
      }
      return grad;
    });
    ++loss_count;
    ++entropy_count;
    reward_sum += ro.rewards.sum();
    reward_count += batch;
    frames += batch;
    if (clock.due(frames)) emit();
  }
  result.agent = learner.agent();
  return result;
}

}  // namespace rgvf::agent
