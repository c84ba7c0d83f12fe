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

#ifndef RGVF_ENVS_H_
#define RGVF_ENVS_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rgvf/random.h"
#include "rgvf/transition.h"

namespace rgvf::envs {

enum Action : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr int kNumActions = 4;
inline constexpr std::array<int, kNumActions> kAllActions = {kUp, kDown, kLeft, kRight};
const char* action_name(int action);

// Grid coordinates in the 9x9 map; the interior is rows and columns 1..7.
struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct RoomConfig {
  Cell goal{1, 6};   // top interior row, second column from the right
  Cell start{7, 1};  // bottom-left interior corner
  bool random_start = false;
  // When set, a blocked move while standing on the goal also pays 1.
  bool reward_on_blocked_goal = false;

  friend bool operator==(const RoomConfig&, const RoomConfig&) = default;
};

// Outcome of one move from a given state.
struct Move {
  int next_state = 0;
  double reward = 0.0;
  bool blocked = false;
};

struct StepResult {
  Eigen::VectorXd observation;
  double reward = 0.0;
  bool blocked = false;
  Transition transition;
};

// A 7x7 room surrounded by walls. Observations are two 9x9 binary planes
// (walls, agent position) flattened to 162 entries. Never terminates.
class EmptyRoom {
 public:
  static constexpr int kGridSize = 9;
  static constexpr int kInteriorSize = 7;
  static constexpr int kNumStates = kInteriorSize * kInteriorSize;
  static constexpr int kObservationSize = 2 * kGridSize * kGridSize;
  static ObservationShape observation_shape() { return {2, kGridSize, kGridSize}; }

  explicit EmptyRoom(RoomConfig config = {});

  // Returns the first observation. The seed only matters with random_start.
  Eigen::VectorXd reset(std::uint64_t seed);
  StepResult step(int action);

  int state() const { return state_; }
  Cell position() const { return cell_of(state_); }
  void set_state(int state);
  const RoomConfig& config() const { return config_; }

  // Pure dynamics, no side effects.
  Move move(int state, int action) const;

  Eigen::VectorXd observe() const { return observation_for(state_); }
  static Eigen::VectorXd observation_for(int state);
  // Agent position decoded from the agent plane. Throws unless exactly one bit is set.
  static Cell decode_position(const Eigen::VectorXd& observation);

  static bool is_interior(Cell c);
  static int state_index(Cell c);  // 0..48, row-major over the interior
  static Cell cell_of(int state);

 private:
  RoomConfig config_;
  int state_ = 0;
};

// Tabular model of the room under the uniform random policy.
struct ExactModel {
  int num_states = 0;
  int num_actions = 0;
  std::vector<std::array<Move, kNumActions>> moves;  // per state
  std::vector<Eigen::MatrixXd> transition;           // P_a, one per action
  Eigen::MatrixXd policy_transition;                 // P_pi
  Eigen::VectorXd policy_reward;                     // r_pi(s) = sum_a pi(a) r(s, a)
};

ExactModel exact_model(const EmptyRoom& env);

// Lock-step copies of the room, each with its own random stream. The stream
// drives random starts and uniform action sampling.
class VectorEnv {
 public:
  VectorEnv(int n_actors, std::uint64_t seed, RoomConfig config = {});
  VectorEnv(std::vector<std::uint64_t> actor_seeds, RoomConfig config = {});

  int size() const { return static_cast<int>(envs_.size()); }
  // One row per actor.
  Eigen::MatrixXd reset();
  Eigen::MatrixXd observations() const;

  struct BatchStep {
    Eigen::MatrixXd observations;  // n_actors x 162
    Eigen::VectorXd rewards;
    std::vector<bool> blocked;
    std::vector<Transition> transitions;
  };
  BatchStep step(std::span<const int> actions);

  std::vector<int> sample_uniform_actions();
  Rng& actor_rng(int i) { return rngs_[i]; }
  const EmptyRoom& actor(int i) const { return envs_[i]; }

 private:
  std::vector<std::uint64_t> seeds_;
  std::vector<EmptyRoom> envs_;
  std::vector<Rng> rngs_;
};

}  // namespace rgvf::envs

#endif  // RGVF_ENVS_H_
