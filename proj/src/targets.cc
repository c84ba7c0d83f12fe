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

#include "rgvf/targets.h"

#include <algorithm>
#include <string>

#include "rgvf/errors.h"

namespace rgvf {

int TargetBatch::masked_count() const {
  return static_cast<int>(std::count(mask.begin(), mask.end(), true));
}

TargetBatch compute_targets(const QuestionNetwork& net,
                            const Eigen::Ref<const Eigen::VectorXd>& features,
                            const Eigen::Ref<const Eigen::VectorXd>& next_answers,
                            int executed_action, bool terminal) {
  const int n_p = net.num_predictions();
  if (features.size() != net.num_features()) {
    throw ShapeError("compute_targets: expected " + std::to_string(net.num_features()) +
                     " features, got " + std::to_string(features.size()));
  }
  if (next_answers.size() != n_p) {
    throw ShapeError("compute_targets: expected " + std::to_string(n_p) +
                     " answers, got " + std::to_string(next_answers.size()));
  }
  TargetBatch batch;
  batch.targets = Eigen::VectorXd::Zero(n_p);
  batch.mask.assign(n_p, true);
  if (terminal) return batch;

  for (int i = 0; i < n_p; ++i) {
    const auto& node = net.prediction(i);
    if (node.condition && *node.condition != executed_action) batch.mask[i] = false;
    double y = 0.0;
    for (const Edge& e : node.edges) {
      y += e.weight * (e.target.is_feature() ? features(e.target.index)
                                             : next_answers(e.target.index));
    }
    batch.targets(i) = y;
  }
  return batch;
}

AnswerLoss answer_loss(const Eigen::Ref<const Eigen::VectorXd>& predictions,
                       const TargetBatch& batch) {
  const auto n = predictions.size();
  if (batch.targets.size() != n || static_cast<Eigen::Index>(batch.mask.size()) != n) {
    throw ShapeError("answer_loss: prediction and target sizes differ");
  }
  AnswerLoss out;
  out.gradient = Eigen::VectorXd::Zero(n);
  const int m = batch.masked_count();
  if (m == 0) return out;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!batch.mask[i]) continue;
    const double diff = predictions(i) - batch.targets(i);
    out.loss += diff * diff;
    out.gradient(i) = 2.0 * diff / m;
  }
  out.loss /= m;
  return out;
}

}  // namespace rgvf
