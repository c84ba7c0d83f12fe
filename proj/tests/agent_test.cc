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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "rgvf/agent.h"
#include "rgvf/errors.h"
#include "rgvf/oracle.h"
#include "rgvf/targets.h"

namespace rgvf::agent {
namespace {

using envs::EmptyRoom;

const std::vector<int> kFour = {0, 1, 2, 3};

AuxiliaryTask touch_task(QuestionNetwork net) {
  return {std::move(net), FeatureFunction(TouchSpec{}, EmptyRoom::observation_shape())};
}

TrainConfig small_config(long frames) {
  TrainConfig c;
  c.total_frames = frames;
  c.eval_period = 640;
  c.seed = 4;
  return c;
}

TEST_CASE("predict shapes and purity") {
  const AgentNet net(162, 20, 4, Architecture{}, true, 1);
  const Eigen::MatrixXd obs = all_state_observations();
  const AgentNet::Output a = net.predict(obs);
  CHECK(a.state.rows() == 49);
  CHECK(a.state.cols() == 32);
  CHECK(a.value.size() == 49);
  CHECK(a.answers.cols() == 20);
  CHECK(a.policy_logits.cols() == 4);
  CHECK(a.value.allFinite());
  CHECK(a.answers.allFinite());
  const AgentNet::Output b = net.predict(obs);
  CHECK(a.value == b.value);
  CHECK(a.answers == b.answers);

  AgentNet open = net;
  open.stop_gradient = false;
  CHECK(open.predict(obs).value == a.value);

  const AgentNet bare(162, 0, 0, Architecture{}, true, 1);
  CHECK(bare.predict(obs).answers.cols() == 0);
  CHECK(bare.predict(obs).policy_logits.size() == 0);
  CHECK_THROWS_AS(net.predict(Eigen::MatrixXd::Zero(2, 10)), ShapeError);
}

TEST_CASE("modules must chain") {
  Rng rng(1);
  const std::vector<int> h = {8};
  const nn::DenseNet repr = nn::DenseNet::mlp(162, h, 6, nn::Activation::kRelu, rng);
  const nn::DenseNet rl = nn::DenseNet::mlp(6, h, 5, nn::Activation::kIdentity, rng);
  const nn::DenseNet ans = nn::DenseNet::mlp(6, h, 3, nn::Activation::kIdentity, rng);
  CHECK_NOTHROW(AgentNet(repr, rl, ans, 4, true));
  CHECK_THROWS_AS(AgentNet(repr, rl, ans, 3, true), ShapeError);
  const nn::DenseNet bad = nn::DenseNet::mlp(7, h, 3, nn::Activation::kIdentity, rng);
  CHECK_THROWS_AS(AgentNet(repr, rl, bad, 4, true), ShapeError);
}

TEST_CASE("checkpoint json round trip") {
  const AgentNet net(162, 5, 4, Architecture{}, false, 9);
  const AgentNet back = agent_from_json(nlohmann::json::parse(to_json(net).dump()));
  CHECK(back.repr == net.repr);
  CHECK(back.rl_head == net.rl_head);
  CHECK(back.answer_head == net.answer_head);
  CHECK(back.stop_gradient == net.stop_gradient);
  CHECK(back.num_actions() == 4);
  CHECK_THROWS_AS(agent_from_json(nlohmann::json::parse("{\"version\": 1}")), ParseError);
}

TEST_CASE("train config validation lists every field") {
  TrainConfig c;
  c.n_actors = 0;
  c.gamma_env = 1.0;
  c.eval_period = 0;
  try {
    check_train_config(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("n_actors") != std::string::npos);
    CHECK(msg.find("gamma_env") != std::string::npos);
    CHECK(msg.find("eval_period") != std::string::npos);
  }
  CHECK_NOTHROW(check_train_config(TrainConfig{}));
}

TEST_CASE("metrics schedule and metric recomputation") {
  const AuxiliaryTask task = touch_task(make_full_tree(kFour, 1));
  TrainConfig c = small_config(3200);
  std::vector<MetricsRow> streamed;
  const TrainResult r = evaluate_policy_train(&task, c, [&](const MetricsRow& m) {
    streamed.push_back(m);
  });
  REQUIRE(r.metrics.size() == streamed.size());
  std::vector<long> frames;
  for (const auto& m : r.metrics) frames.push_back(m.frames);
  CHECK(frames == std::vector<long>{0, 640, 1280, 1920, 2560, 3200});
  CHECK(r.metrics.front().answer_loss == 0.0);
  CHECK(r.metrics.back().answer_loss > 0.0);

  const Eigen::VectorXd truth =
      oracle::true_values(envs::exact_model(EmptyRoom()), c.gamma_env);
  const Eigen::VectorXd v = r.agent.predict(all_state_observations()).value;
  double mse = 0.0;
  for (int s = 0; s < 49; ++s) mse += (v(s) - truth(s)) * (v(s) - truth(s)) / 49.0;
  CHECK(r.metrics.back().value_mse == doctest::Approx(mse).epsilon(1e-12));
}

TEST_CASE("training is deterministic in the seed") {
  const AuxiliaryTask task = touch_task(make_full_tree(kFour, 2));
  const TrainConfig c = small_config(2048);
  const TrainResult a = evaluate_policy_train(&task, c);
  const TrainResult b = evaluate_policy_train(&task, c);
  REQUIRE(a.metrics.size() == b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    CHECK(a.metrics[i].value_mse == b.metrics[i].value_mse);
    CHECK(a.metrics[i].answer_loss == b.metrics[i].answer_loss);
  }
  CHECK(a.agent.repr == b.agent.repr);
}

TEST_CASE("zero learning rates freeze everything") {
  const AuxiliaryTask task = touch_task(make_full_tree(kFour, 1));
  TrainConfig c = small_config(3200);
  c.lr_rl = 0.0;
  c.lr_answer = 0.0;
  const TrainResult r = evaluate_policy_train(&task, c);
  for (const auto& m : r.metrics) CHECK(m.value_mse == r.metrics.front().value_mse);
}

TEST_CASE("stop-gradient isolates the representation from the RL loss") {
  const AuxiliaryTask task = touch_task(make_full_tree(kFour, 2));
  TrainConfig c = small_config(2560);
  const TrainResult with_rl = evaluate_policy_train(&task, c);
  c.lr_rl = 0.0;
  const TrainResult without_rl = evaluate_policy_train(&task, c);
  CHECK(with_rl.agent.repr == without_rl.agent.repr);
  CHECK(with_rl.agent.answer_head == without_rl.agent.answer_head);
  CHECK_FALSE(with_rl.agent.rl_head == without_rl.agent.rl_head);

  // Without the flag the RL loss does move the representation.
  c.lr_rl = 1e-3;
  c.stop_gradient = false;
  const TrainResult joint = evaluate_policy_train(&task, c);
  CHECK_FALSE(joint.agent.repr == with_rl.agent.repr);
}

TEST_CASE("representation without any gradient path never changes") {
  TrainConfig c = small_config(640);
  const TrainResult short_run = evaluate_policy_train(nullptr, c);
  c.total_frames = 6400;
  const TrainResult long_run = evaluate_policy_train(nullptr, c);
  CHECK(short_run.agent.repr == long_run.agent.repr);
  CHECK_FALSE(short_run.agent.rl_head == long_run.agent.rl_head);

  const AuxiliaryTask task = touch_task(make_full_tree(kFour, 1));
  c.representation = Representation::kFrozen;
  const TrainResult frozen = evaluate_policy_train(&task, c);
  CHECK(frozen.agent.repr == long_run.agent.repr);

  TrainConfig ac = small_config(640);
  const TrainResult ac_short = actor_critic_train(nullptr, ac);
  ac.total_frames = 6400;
  const TrainResult ac_long = actor_critic_train(nullptr, ac);
  CHECK(ac_short.agent.repr == ac_long.agent.repr);
}

TEST_CASE("answer targets are constants (semi-gradient)") {
  // One-state chain: the successor's answer is the current answer, so the
  // full derivative of (y - (f + g y))^2 would carry a factor (1 - g).
  const QuestionNetwork net = make_discounted_sum(1, 0.8);
  Eigen::VectorXd f(1), y(1);
  f << 1.0;
  y << 0.3;
  auto loss_of = [&](double v) {
    Eigen::VectorXd p(1);
    p << v;
    return answer_loss(p, compute_targets(net, f, p, 0, false)).loss;
  };
  const double fd = (loss_of(0.3 + 1e-6) - loss_of(0.3 - 1e-6)) / 2e-6;
  const AnswerLoss l = answer_loss(y, compute_targets(net, f, y, 0, false));
  const double target = 1.0 + 0.8 * 0.3;
  CHECK(l.gradient(0) == doctest::Approx(2.0 * (0.3 - target)).epsilon(1e-12));
  CHECK(fd == doctest::Approx(2.0 * (1.0 - 0.8) * (0.3 - target)).epsilon(1e-6));
  CHECK(std::abs(l.gradient(0) - fd) > 0.1);
}

TEST_CASE("huge entropy bonus keeps the policy near uniform") {
  TrainConfig c = small_config(32000);
  c.eval_period = 3200;
  c.entropy_coef = 1000.0;
  const TrainResult r = actor_critic_train(nullptr, c);
  for (std::size_t i = 1; i < r.metrics.size(); ++i) {
    CHECK(r.metrics[i].policy_entropy > 0.99 * std::log(4.0));
  }
}

TEST_CASE("end-to-end actor-critic beats the random policy") {
  // Random-policy return rate: the stationary distribution is uniform, so the
  // expected discounted return rate is the mean exact state value.
  const double baseline =
      oracle::true_values(envs::exact_model(EmptyRoom()), 0.98).mean();
  TrainConfig c = small_config(40000);
  c.eval_period = 10000;
  c.stop_gradient = false;
  const TrainResult r = actor_critic_train(nullptr, c);
  CHECK(std::isnan(r.metrics.front().return_value));
  CHECK(r.metrics.back().return_value > 5.0 * baseline);
  CHECK(r.metrics.back().policy_entropy < r.metrics.front().policy_entropy);
}

TEST_CASE("policy values of a fixed policy") {
  const envs::ExactModel m = envs::exact_model(EmptyRoom());
  const Eigen::VectorXd uniform = policy_values(m, Eigen::MatrixXd::Zero(49, 4), 0.98);
  CHECK((uniform - oracle::true_values(m, 0.98)).cwiseAbs().maxCoeff() < 1e-10);
  // Always moving up from below the goal column walks into the goal, then
  // bumps the wall without further reward.
  Eigen::MatrixXd up = Eigen::MatrixXd::Zero(49, 4);
  up.col(envs::kUp).setConstant(1000.0);
  const Eigen::VectorXd v = policy_values(m, up, 0.9);
  CHECK(v(EmptyRoom::state_index({2, 6})) == doctest::Approx(1.0));
  CHECK(v(EmptyRoom::state_index({4, 6})) == doctest::Approx(0.81));
  CHECK(v(EmptyRoom::state_index({4, 4})) == doctest::Approx(0.0));
}

TEST_CASE("tabular TD learns deterministic one-step answers") {
  const QuestionNetwork net = make_full_tree(kFour, 1);
  const FeatureFunction f(TouchSpec{}, EmptyRoom::observation_shape());
  TabularTdConfig c;
  c.steps = 20000;
  const Eigen::MatrixXd y = tabular_td(net, f, c);
  const envs::ExactModel m = envs::exact_model(EmptyRoom());
  const Eigen::MatrixXd exact = oracle::exact_gvf_values(net, m, oracle::feature_table(f, m)).values;
  CHECK((y - exact).cwiseAbs().maxCoeff() < 1e-6);
}

}  // namespace
}  // namespace rgvf::agent
