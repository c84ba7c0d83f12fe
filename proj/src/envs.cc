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

#include "rgvf/envs.h"

#include <string>

#include "rgvf/errors.h"

namespace rgvf::envs {

namespace {

constexpr int kRowDelta[kNumActions] = {-1, 1, 0, 0};
constexpr int kColDelta[kNumActions] = {0, 0, -1, 1};
constexpr int kPlane = EmptyRoom::kGridSize * EmptyRoom::kGridSize;

void check_action(int action) {
  if (action < 0 || action >= kNumActions) {
    throw ConfigError("invalid action " + std::to_string(action));
  }
}

}  // namespace

const char* action_name(int action) {
  static constexpr const char* kNames[kNumActions] = {"up", "down", "left", "right"};
  check_action(action);
  return kNames[action];
}

EmptyRoom::EmptyRoom(RoomConfig config) : config_(config) {
  if (!is_interior(config_.goal)) throw ConfigError("goal must be an interior cell");
  if (!is_interior(config_.start)) throw ConfigError("start must be an interior cell");
  state_ = state_index(config_.start);
}

bool EmptyRoom::is_interior(Cell c) {
  return c.row >= 1 && c.row <= kInteriorSize && c.col >= 1 && c.col <= kInteriorSize;
}

int EmptyRoom::state_index(Cell c) {
  if (!is_interior(c)) throw ConfigError("cell is not inside the room");
  return (c.row - 1) * kInteriorSize + (c.col - 1);
}

Cell EmptyRoom::cell_of(int state) {
  if (state < 0 || state >= kNumStates) throw ConfigError("state index out of range");
  return {state / kInteriorSize + 1, state % kInteriorSize + 1};
}

Eigen::VectorXd EmptyRoom::reset(std::uint64_t seed) {
  if (config_.random_start) {
    Rng rng(seed);
    state_ = static_cast<int>(rng.uniform_index(kNumStates));
  } else {
    state_ = state_index(config_.start);
  }
  return observe();
}

void EmptyRoom::set_state(int state) {
  cell_of(state);
  state_ = state;
}

Move EmptyRoom::move(int state, int action) const {
  check_action(action);
  const Cell c = cell_of(state);
  const Cell target{c.row + kRowDelta[action], c.col + kColDelta[action]};
  Move m;
  m.blocked = !is_interior(target);
  const Cell next = m.blocked ? c : target;
  m.next_state = state_index(next);
  const bool on_goal = next == config_.goal;
  m.reward = on_goal && (!m.blocked || config_.reward_on_blocked_goal) ? 1.0 : 0.0;
  return m;
}

StepResult EmptyRoom::step(int action) {
  const Move m = move(state_, action);
  StepResult out;
  out.transition.observation = observe();
  state_ = m.next_state;
  out.observation = observe();
  out.reward = m.reward;
  out.blocked = m.blocked;
  out.transition.action = action;
  out.transition.next_observation = out.observation;
  out.transition.blocked = m.blocked;
  out.transition.reward = m.reward;
  out.transition.terminal = false;
  return out;
}

Eigen::VectorXd EmptyRoom::observation_for(int state) {
  const Cell c = cell_of(state);
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(kObservationSize);
  for (int r = 0; r < kGridSize; ++r) {
    for (int col = 0; col < kGridSize; ++col) {
      if (!is_interior({r, col})) obs(r * kGridSize + col) = 1.0;
    }
  }
  obs(kPlane + c.row * kGridSize + c.col) = 1.0;
  return obs;
}

Cell EmptyRoom::decode_position(const Eigen::VectorXd& observation) {
  if (observation.size() != kObservationSize) throw ShapeError("observation must have 162 entries");
  int found = -1;
  for (int i = 0; i < kPlane; ++i) {
    const double v = observation(kPlane + i);
    if (v == 0.0) continue;
    if (v != 1.0 || found >= 0) throw ShapeError("agent plane is not one-hot");
    found = i;
  }
  if (found < 0) throw ShapeError("agent plane is empty");
  return {found / kGridSize, found % kGridSize};
}

ExactModel exact_model(const EmptyRoom& env) {
  ExactModel model;
  model.num_states = EmptyRoom::kNumStates;
  model.num_actions = kNumActions;
  model.moves.resize(model.num_states);
  model.transition.assign(kNumActions, Eigen::MatrixXd::Zero(model.num_states, model.num_states));
  model.policy_reward = Eigen::VectorXd::Zero(model.num_states);
  const double pi = 1.0 / kNumActions;
  for (int s = 0; s < model.num_states; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      const Move m = env.move(s, a);
      model.moves[s][a] = m;
      model.transition[a](s, m.next_state) += 1.0;
      model.policy_reward(s) += pi * m.reward;
    }
  }
  model.policy_transition = Eigen::MatrixXd::Zero(model.num_states, model.num_states);
  for (const auto& p : model.transition) model.policy_transition += pi * p;
  return model;
}

VectorEnv::VectorEnv(int n_actors, std::uint64_t seed, RoomConfig config) {
  if (n_actors < 1) throw ConfigError("vector env: n_actors must be >= 1");
  for (int i = 0; i < n_actors; ++i) seeds_.push_back(mix_seed(seed, i));
  for (auto s : seeds_) {
    envs_.emplace_back(config);
    rngs_.emplace_back(s);
  }
}

VectorEnv::VectorEnv(std::vector<std::uint64_t> actor_seeds, RoomConfig config)
    : seeds_(std::move(actor_seeds)) {
  if (seeds_.empty()) throw ConfigError("vector env: n_actors must be >= 1");
  for (auto s : seeds_) {
    envs_.emplace_back(config);
    rngs_.emplace_back(s);
  }
}

Eigen::MatrixXd VectorEnv::reset() {
  for (std::size_t i = 0; i < envs_.size(); ++i) {
    envs_[i].reset(rngs_[i].next_u64());
  }
  return observations();
}

Eigen::MatrixXd VectorEnv::observations() const {
  Eigen::MatrixXd obs(size(), EmptyRoom::kObservationSize);
  for (int i = 0; i < size(); ++i) obs.row(i) = envs_[i].observe().transpose();
  return obs;
}

VectorEnv::BatchStep VectorEnv::step(std::span<const int> actions) {
  if (static_cast<int>(actions.size()) != size()) throw ShapeError("vector env: one action per actor");
  BatchStep out;
  out.observations.resize(size(), EmptyRoom::kObservationSize);
  out.rewards.resize(size());
  out.blocked.resize(size());
  out.transitions.reserve(size());
  for (int i = 0; i < size(); ++i) {
    StepResult r = envs_[i].step(actions[i]);
    out.observations.row(i) = r.observation.transpose();
    out.rewards(i) = r.reward;
    out.blocked[i] = r.blocked;
    out.transitions.push_back(std::move(r.transition));
  }
  return out;
}

std::vector<int> VectorEnv::sample_uniform_actions() {
  std::vector<int> actions(size());
  for (int i = 0; i < size(); ++i) {
    actions[i] = static_cast<int>(rngs_[i].uniform_index(kNumActions));
  }
  return actions;
}

}  // namespace rgvf::envs
