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

#ifndef RGVF_QNET_H_
#define RGVF_QNET_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rgvf {

enum class NodeKind { kFeature, kPrediction };

// A node reference. Indices are dense within each kind.
struct NodeId {
  NodeKind kind = NodeKind::kFeature;
  int index = 0;

  static NodeId feature(int i) { return {NodeKind::kFeature, i}; }
  static NodeId prediction(int i) { return {NodeKind::kPrediction, i}; }
  bool is_feature() const { return kind == NodeKind::kFeature; }

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct Edge {
  NodeId target;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// One row of the adjacency matrix W restricted to its nonzero entries, plus
// the optional action the prediction is conditioned on.
struct PredictionNode {
  int layer = 0;
  std::optional<int> condition;  // action id; empty means on-policy
  std::vector<Edge> edges;

  // Weight of the edge back to this node, or 0 when there is none.
  double self_loop_weight(int self_index) const;

  friend bool operator==(const PredictionNode&, const PredictionNode&) = default;
};

// A layered graph of feature nodes and prediction nodes defining the targets
// of a set of interdependent general value functions.
//
// Construction does not validate; use validate() for structural checks.
class QuestionNetwork {
 public:
  QuestionNetwork() = default;
  QuestionNetwork(int n_features, std::vector<int> actions,
                  std::vector<PredictionNode> predictions);

  int num_features() const { return n_features_; }
  int num_predictions() const { return static_cast<int>(predictions_.size()); }
  const std::vector<int>& actions() const { return actions_; }
  std::span<const PredictionNode> predictions() const { return predictions_; }
  const PredictionNode& prediction(int i) const { return predictions_[i]; }

  // Position of an action id in actions(), if present.
  std::optional<int> action_index(int action_id) const;

  // Largest layer index over prediction nodes; 0 for an empty network.
  int depth() const;

  // Number of prediction nodes in each layer 0..depth().
  std::vector<int> layer_sizes() const;

  friend bool operator==(const QuestionNetwork&, const QuestionNetwork&) = default;

 private:
  int n_features_ = 0;
  std::vector<int> actions_;
  std::vector<PredictionNode> predictions_;
};

// One layer-0 discounted-sum prediction per feature: an edge of weight 1 to
// its feature and a self-loop of weight gamma.
QuestionNetwork make_discounted_sum(int n_features, double gamma);

// Full action-conditional tree over a single feature node. Every internal
// node has one child per action; nodes below the first level also carry a
// skip edge to the feature. Tree level d lives in layer d.
QuestionNetwork make_full_tree(std::span<const int> actions, int depth);

struct GeneratorConfig {
  int n_features = 1;
  double gamma = 0.8;
  std::vector<int> actions = {0};
  int depth = 0;
  int repeat = 1;
  std::uint64_t seed = 0;
};

// Throws ConfigError on out-of-range fields, including repeat > 2 * n_features.
void check_generator_config(const GeneratorConfig& config);

// Random question network: layer 0 holds one discounted-sum node per
// feature; each of the `depth` following layers holds `repeat` nodes per
// action. Each such node links to a distinct parent drawn from the previous
// layer's leaves and to a uniformly drawn feature. Deterministic in the seed.
QuestionNetwork generate_random(const GeneratorConfig& config);

// n_f + D * R * |A|.
std::int64_t generated_prediction_count(const GeneratorConfig& config);

enum class ViolationKind {
  kMissingEdges,
  kDanglingReference,
  kUnknownAction,
  kIllegalSelfLoop,
  kNotGrounded,
  kCycle,
  kDuplicatePrediction,
  kBadWeight,
};

struct Violation {
  ViolationKind kind;
  int node;  // prediction index, or -1 for network-level problems
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
  std::string to_string() const;
};

ValidationReport validate(const QuestionNetwork& net);

// Reorders prediction nodes by (layer, action position, current order) with
// unconditioned nodes first within a layer, remapping edge targets.
QuestionNetwork canonicalize(const QuestionNetwork& net);

// JSON document, canonical key and node order. Byte-stable for a fixed net.
std::string serialize(const QuestionNetwork& net);

// Throws ParseError with line or field context on malformed input.
QuestionNetwork deserialize(const std::string& text);

// Graphviz description: boxes for features, circles for predictions.
std::string to_dot(const QuestionNetwork& net);

}  // namespace rgvf

#endif  // RGVF_QNET_H_
