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

#ifndef RGVF_TRANSITION_H_
#define RGVF_TRANSITION_H_

#include <Eigen/Core>

namespace rgvf {

// (O_t, A_t, O_{t+1}) plus the environment signals features may read.
struct Transition {
  Eigen::VectorXd observation;
  int action = 0;
  Eigen::VectorXd next_observation;
  bool blocked = false;  // the attempted move hit a wall
  double reward = 0.0;
  bool terminal = false;
};

// Layout of a flattened observation: channel-major, then row, then column.
struct ObservationShape {
  int channels = 1;
  int rows = 1;
  int cols = 1;

  int size() const { return channels * rows * cols; }
  friend bool operator==(const ObservationShape&, const ObservationShape&) = default;
};

}  // namespace rgvf

#endif  // RGVF_TRANSITION_H_
