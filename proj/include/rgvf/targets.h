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

#ifndef RGVF_TARGETS_H_
#define RGVF_TARGETS_H_

#include <vector>

#include <Eigen/Core>

#include "rgvf/qnet.h"

namespace rgvf {

// Bootstrap targets y^i and the per-node update mask. mask[i] is false only
// for action-conditioned nodes whose action was not executed.
struct TargetBatch {
  Eigen::VectorXd targets;
  std::vector<bool> mask;

  int masked_count() const;
};

// One-step TD targets for every prediction node:
//   y^i = sum_j W_ij * next_answers_j + sum_k W_ik * features_k
// Terminal transitions give all-zero targets with every node updated.
// Targets are plain values; no gradient flows through next_answers.
TargetBatch compute_targets(const QuestionNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& features,
                            const Eigen::Ref<const Eigen::VectorXd>& next_answers,
                            int executed_action, bool terminal);

struct AnswerLoss {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // d loss / d predictions
};

// Mean over masked-in nodes of (prediction - target)^2.
AnswerLoss answer_loss(const Eigen::Ref<const Eigen::VectorXd>& predictions, const TargetBatch& batch);

}  // namespace rgvf

#endif  // RGVF_TARGETS_H_
