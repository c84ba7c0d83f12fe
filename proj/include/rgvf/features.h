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

#ifndef RGVF_FEATURES_H_
#define RGVF_FEATURES_H_

#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "rgvf/transition.h"

namespace rgvf {

// 1 when the move was blocked by a wall.
struct TouchSpec {
  friend bool operator==(const TouchSpec&, const TouchSpec&) = default;
};

// `count` random linear functionals of the whole flattened observation.
struct RandomLinearSpec {
  int count = 1;
  std::uint64_t seed = 0;
  double weight_scale = 1.0;  // weights ~ U[-weight_scale, weight_scale]
  std::vector<int> channels;  // restrict to these channels; empty means all
  friend bool operator==(const RandomLinearSpec&, const RandomLinearSpec&) = default;
};

// Functionals shared across a grid of disjoint patches.
struct RandomPatchSpec {
  int patch_rows = 1;  // patches along the row axis
  int patch_cols = 1;  // patches along the column axis
  int functions_per_patch = 1;
  std::uint64_t seed = 0;
  double weight_scale = 1.0;
  friend bool operator==(const RandomPatchSpec&, const RandomPatchSpec&) = default;
};

using FeatureSpec = std::variant<TouchSpec, RandomLinearSpec, RandomPatchSpec>;

double touch(const Transition& t);

// Transition features f^k(O, A, O'). Random variants compute
// |g^k(O') - g^k(O)| with g^k drawn once at construction.
class FeatureFunction {
 public:
  FeatureFunction(FeatureSpec spec, ObservationShape shape);

  // Linear functionals given explicitly: one row of `weights` per feature.
  static FeatureFunction linear_from_weights(Eigen::MatrixXd weights, ObservationShape shape);

  // Shared patch functionals given explicitly: one row per function, each of
  // length channels * (rows / patch_rows) * (cols / patch_cols).
  static FeatureFunction patch_from_weights(Eigen::MatrixXd weights, ObservationShape shape,
                                            int patch_rows, int patch_cols);

  int size() const { return size_; }
  const FeatureSpec& spec() const { return spec_; }
  const ObservationShape& shape() const { return shape_; }
  bool is_touch() const { return std::holds_alternative<TouchSpec>(spec_); }

  // g(O) for the random variants; throws for touch.
  Eigen::VectorXd project(const Eigen::VectorXd& observation) const;

  Eigen::VectorXd operator()(const Transition& t) const;

 private:
  FeatureFunction() = default;

  FeatureSpec spec_;
  ObservationShape shape_;
  int size_ = 1;
  Eigen::MatrixXd weights_;  // linear: count x obs; patch: functions x patch_len
};

}  // namespace rgvf

#endif  // RGVF_FEATURES_H_
