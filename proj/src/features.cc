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

#include "rgvf/features.h"

#include <algorithm>
#include <string>

#include "rgvf/errors.h"
#include "rgvf/random.h"

namespace rgvf {

namespace {

void check_observation(const Eigen::VectorXd& o, const ObservationShape& shape) {
  if (o.size() != shape.size()) {
    throw ShapeError("observation has " + std::to_string(o.size()) + " entries, expected " +
                     std::to_string(shape.size()));
  }
}

void check_patch_grid(const ObservationShape& shape, int patch_rows, int patch_cols) {
  if (patch_rows < 1 || patch_cols < 1) throw ConfigError("patch grid must be positive");
  if (shape.rows % patch_rows != 0 || shape.cols % patch_cols != 0) {
    throw ShapeError("observation " + std::to_string(shape.rows) + "x" +
                     std::to_string(shape.cols) + " is not divisible into a " +
                     std::to_string(patch_rows) + "x" + std::to_string(patch_cols) +
                     " patch grid");
  }
}

}  // namespace

double touch(const Transition& t) { return t.blocked ? 1.0 : 0.0; }

FeatureFunction::FeatureFunction(FeatureSpec spec, ObservationShape shape)
    : spec_(std::move(spec)), shape_(shape) {
  if (shape_.channels < 1 || shape_.rows < 1 || shape_.cols < 1) {
    throw ShapeError("observation shape must be positive");
  }
  if (std::holds_alternative<TouchSpec>(spec_)) {
    size_ = 1;
  } else if (const auto* s = std::get_if<RandomLinearSpec>(&spec_)) {
    if (s->count < 1) throw ConfigError("random linear features: count must be >= 1");
    if (!(s->weight_scale > 0.0)) throw ConfigError("weight_scale must be positive");
    std::vector<char> use(shape_.channels, s->channels.empty() ? 1 : 0);
    for (int c : s->channels) {
      if (c < 0 || c >= shape_.channels) throw ConfigError("feature channel out of range");
      use[c] = 1;
    }
    size_ = s->count;
    const int plane = shape_.rows * shape_.cols;
    weights_ = Eigen::MatrixXd::Zero(size_, shape_.size());
    Rng rng(s->seed);
    for (int k = 0; k < size_; ++k) {
      for (int c = 0; c < shape_.channels; ++c) {
        if (!use[c]) continue;
        for (int i = 0; i < plane; ++i) {
          weights_(k, c * plane + i) = rng.uniform(-s->weight_scale, s->weight_scale);
        }
      }
    }
  } else {
    const auto& p = std::get<RandomPatchSpec>(spec_);
    check_patch_grid(shape_, p.patch_rows, p.patch_cols);
    if (p.functions_per_patch < 1) throw ConfigError("functions_per_patch must be >= 1");
    if (!(p.weight_scale > 0.0)) throw ConfigError("weight_scale must be positive");
    size_ = p.patch_rows * p.patch_cols * p.functions_per_patch;
    const int patch_len =
        shape_.channels * (shape_.rows / p.patch_rows) * (shape_.cols / p.patch_cols);
    weights_.resize(p.functions_per_patch, patch_len);
    Rng rng(p.seed);
    for (int j = 0; j < p.functions_per_patch; ++j) {
      for (int i = 0; i < patch_len; ++i) weights_(j, i) = rng.uniform(-p.weight_scale, p.weight_scale);
    }
  }
}

FeatureFunction FeatureFunction::linear_from_weights(Eigen::MatrixXd weights,
                                                     ObservationShape shape) {
  if (weights.rows() < 1 || weights.cols() != shape.size()) {
    throw ShapeError("linear feature weights must have one column per observation entry");
  }
  FeatureFunction f;
  f.spec_ = RandomLinearSpec{static_cast<int>(weights.rows()), 0, 1.0, {}};
  f.shape_ = shape;
  f.size_ = static_cast<int>(weights.rows());
  f.weights_ = std::move(weights);
  return f;
}

FeatureFunction FeatureFunction::patch_from_weights(Eigen::MatrixXd weights,
                                                    ObservationShape shape, int patch_rows,
                                                    int patch_cols) {
  check_patch_grid(shape, patch_rows, patch_cols);
  const int patch_len = shape.channels * (shape.rows / patch_rows) * (shape.cols / patch_cols);
  if (weights.rows() < 1 || weights.cols() != patch_len) {
    throw ShapeError("patch weights must have one column per patch entry");
  }
  FeatureFunction f;
  f.spec_ = RandomPatchSpec{patch_rows, patch_cols, static_cast<int>(weights.rows()), 0, 1.0};
  f.shape_ = shape;
  f.size_ = patch_rows * patch_cols * static_cast<int>(weights.rows());
  f.weights_ = std::move(weights);
  return f;
}

Eigen::VectorXd FeatureFunction::project(const Eigen::VectorXd& observation) const {
  check_observation(observation, shape_);
  if (std::holds_alternative<RandomLinearSpec>(spec_)) return weights_ * observation;
  if (!std::holds_alternative<RandomPatchSpec>(spec_)) {
    throw ConfigError("touch has no observation projection");
  }
  const auto& p = std::get<RandomPatchSpec>(spec_);
  const int ph = shape_.rows / p.patch_rows;
  const int pw = shape_.cols / p.patch_cols;
  const int plane = shape_.rows * shape_.cols;
  Eigen::VectorXd patch(weights_.cols());
  Eigen::VectorXd out(size_);
  for (int pr = 0; pr < p.patch_rows; ++pr) {
    for (int pc = 0; pc < p.patch_cols; ++pc) {
      int n = 0;
      for (int c = 0; c < shape_.channels; ++c) {
        for (int r = 0; r < ph; ++r) {
          for (int col = 0; col < pw; ++col) {
            patch(n++) = observation(c * plane + (pr * ph + r) * shape_.cols + pc * pw + col);
          }
        }
      }
      out.segment((pr * p.patch_cols + pc) * weights_.rows(), weights_.rows()) =
          weights_ * patch;
    }
  }
  return out;
}

Eigen::VectorXd FeatureFunction::operator()(const Transition& t) const {
  if (is_touch()) return Eigen::VectorXd::Constant(1, touch(t));
  return (project(t.next_observation) - project(t.observation)).cwiseAbs();
}

}  // namespace rgvf
