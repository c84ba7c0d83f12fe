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

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "rgvf/errors.h"
#include "rgvf/qnet.h"
#include "rgvf/random.h"

namespace rgvf {
namespace {

GeneratorConfig fig_config() {
  GeneratorConfig c;
  c.n_features = 2;
  c.actions = {0, 1};
  c.depth = 2;
  c.repeat = 2;
  c.gamma = 0.8;
  c.seed = 7;
  return c;
}

// A 2-feature net in the shape of the worked example: discounted sums on
// layer 0 and action-conditioned nodes above.
QuestionNetwork hand_net() {
  std::vector<PredictionNode> p(5);
  p[0] = {0, std::nullopt, {{NodeId::feature(0), 1.0}, {NodeId::prediction(0), 0.8}}};
  p[1] = {0, std::nullopt, {{NodeId::feature(1), 1.0}, {NodeId::prediction(1), 0.8}}};
  p[2] = {1, 0, {{NodeId::prediction(0), 1.0}, {NodeId::feature(1), 1.0}}};
  p[3] = {1, 1, {{NodeId::feature(0), 1.0}, {NodeId::feature(1), 1.0}}};
  p[4] = {2, 0, {{NodeId::prediction(3), 1.0}, {NodeId::feature(0), 1.0}}};
  return QuestionNetwork(2, {0, 1}, p);
}

TEST_CASE("discounted sum network") {
  const QuestionNetwork net = make_discounted_sum(3, 0.9);
  CHECK(net.num_features() == 3);
  CHECK(net.num_predictions() == 3);
  CHECK(net.depth() == 0);
  for (int i = 0; i < 3; ++i) {
    CHECK(net.prediction(i).self_loop_weight(i) == 0.9);
    CHECK_FALSE(net.prediction(i).condition.has_value());
  }
  CHECK(validate(net).ok());
  CHECK_THROWS_AS(make_discounted_sum(0, 0.9), ConfigError);
  CHECK_THROWS_AS(make_discounted_sum(1, 0.0), ConfigError);
  CHECK_THROWS_AS(make_discounted_sum(1, 1.5), ConfigError);
}

TEST_CASE("full tree sizes") {
  const std::vector<int> actions = {0, 1, 2, 3};
  // 4 + 16 + ... + 4^d prediction nodes.
  const int expected[] = {4, 20, 84, 340};
  for (int d = 1; d <= 4; ++d) {
    const QuestionNetwork net = make_full_tree(actions, d);
    CHECK(net.num_predictions() == expected[d - 1]);
    CHECK(net.depth() == d);
    CHECK(validate(net).ok());
  }
  const QuestionNetwork d2 = make_full_tree(actions, 2);
  CHECK(d2.layer_sizes() == std::vector<int>{0, 4, 16});
  // First level links only to the feature; deeper nodes add a skip edge.
  CHECK(d2.prediction(0).edges.size() == 1);
  CHECK(d2.prediction(4).edges.size() == 2);
  CHECK_THROWS_AS(make_full_tree(actions, 0), ConfigError);
  const std::vector<int> repeated = {1, 1};
  CHECK_THROWS_AS(make_full_tree(repeated, 1), ConfigError);
}

TEST_CASE("generator example configuration") {
  const QuestionNetwork net = generate_random(fig_config());
  CHECK(net.num_predictions() == 10);
  CHECK(net.layer_sizes() == std::vector<int>{2, 4, 4});
  CHECK(validate(net).ok());
  CHECK(generated_prediction_count(fig_config()) == 10);
}

TEST_CASE("generator edge cases") {
  GeneratorConfig c = fig_config();
  c.depth = 0;
  const QuestionNetwork ds = generate_random(c);
  const QuestionNetwork expected = make_discounted_sum(2, 0.8);
  CHECK(ds.num_features() == 2);
  CHECK(std::ranges::equal(ds.predictions(), expected.predictions()));

  c = fig_config();
  c.repeat = 5;
  CHECK_THROWS_WITH_AS(generate_random(c), doctest::Contains("infeasible"), ConfigError);
  c.repeat = 4;  // exactly 2 * n_features leaves on layer 1
  CHECK(validate(generate_random(c)).ok());

  GeneratorConfig atari;
  atari.n_features = 16;
  atari.depth = 8;
  atari.repeat = 16;
  atari.actions = {0, 1, 2, 3};
  atari.gamma = 0.95;
  CHECK(generate_random(atari).num_predictions() == 528);
}

TEST_CASE("generator is deterministic in the seed") {
  CHECK(generate_random(fig_config()) == generate_random(fig_config()));
  GeneratorConfig other = fig_config();
  bool any_differs = false;
  for (std::uint64_t s = 100; s < 110; ++s) {
    other.seed = s;
    any_differs = any_differs || !(generate_random(other) == generate_random(fig_config()));
  }
  CHECK(any_differs);
}

TEST_CASE("generator structure property sweep") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    GeneratorConfig c;
    c.n_features = 1 + static_cast<int>(rng.uniform_index(6));
    const int n_actions = 1 + static_cast<int>(rng.uniform_index(4));
    c.actions.clear();
    for (int a = 0; a < n_actions; ++a) c.actions.push_back(a);
    c.depth = static_cast<int>(rng.uniform_index(5));
    c.repeat = 1 + static_cast<int>(rng.uniform_index(2 * c.n_features));
    c.gamma = 0.05 + 0.95 * rng.uniform();
    c.seed = rng.next_u64();
    const QuestionNetwork net = generate_random(c);
    REQUIRE(validate(net).ok());
    CHECK(net.num_predictions() == c.n_features + c.depth * c.repeat * n_actions);
    for (int i = 0; i < net.num_predictions(); ++i) {
      const PredictionNode& node = net.prediction(i);
      if (node.layer == 0) continue;
      // One parent in the previous layer (or a leaf of layer 0) and one
      // feature; parents under one action are distinct.
      REQUIRE(node.edges.size() == 2);
      CHECK(node.edges[1].target.is_feature());
      const NodeId parent = node.edges[0].target;
      if (!parent.is_feature()) CHECK(net.prediction(parent.index).layer == node.layer - 1);
    }
    for (int layer = 1; layer <= c.depth; ++layer) {
      for (int a : c.actions) {
        std::set<NodeId> parents;
        int count = 0;
        for (const auto& node : net.predictions()) {
          if (node.layer != layer || node.condition != a) continue;
          parents.insert(node.edges[0].target);
          ++count;
        }
        CHECK(count == c.repeat);
        CHECK(static_cast<int>(parents.size()) == count);
      }
    }
  }
}

TEST_CASE("validate reports each violation kind") {
  CHECK(validate(hand_net()).ok());

  const QuestionNetwork base = hand_net();
  std::vector<PredictionNode> p(base.predictions().begin(), base.predictions().end());

  SUBCASE("missing edges") {
    p[3].edges.clear();
    CHECK(validate(QuestionNetwork(2, {0, 1}, p)).has(ViolationKind::kMissingEdges));
  }
  SUBCASE("dangling reference") {
    p[2].edges[0].target = NodeId::prediction(9);
    CHECK(validate(QuestionNetwork(2, {0, 1}, p)).has(ViolationKind::kDanglingReference));
    p[2].edges[0].target = NodeId::feature(2);
    CHECK(validate(QuestionNetwork(2, {0, 1}, p)).has(ViolationKind::kDanglingReference));
  }
  SUBCASE("unknown action") {
    p[3].condition = 7;
    CHECK(validate(QuestionNetwork(2, {0, 1}, p)).has(ViolationKind::kUnknownAction));
  }
  SUBCASE("self-loop outside layer 0") {
    p[4].edges.push_back({NodeId::prediction(4), 0.5});
    const ValidationReport r = validate(QuestionNetwork(2, {0, 1}, p));
    CHECK(r.has(ViolationKind::kIllegalSelfLoop));
    CHECK(r.to_string().find("self-loop outside layer 0") != std::string::npos);
  }
  SUBCASE("cycle") {
    p[3].edges[0].target = NodeId::prediction(4);
    CHECK(validate(QuestionNetwork(2, {0, 1}, p)).has(ViolationKind::kCycle));
  }
  SUBCASE("not grounded") {
    // Two nodes that only point at each other never reach a feature.
    p[2].edges = {{NodeId::prediction(3), 1.0}};
    p[3].edges = {{NodeId::prediction(2), 1.0}};
    CHECK(validate(QuestionNetwork(2, {0, 1}, p)).has(ViolationKind::kNotGrounded));
  }
  SUBCASE("duplicate prediction") {
    p.push_back(p[4]);
    const ValidationReport r = validate(QuestionNetwork(2, {0, 1}, p));
    CHECK(r.has(ViolationKind::kDuplicatePrediction));
    CHECK(r.to_string().find("duplicate prediction") != std::string::npos);
  }
  SUBCASE("bad weights") {
    p[2].edges[1].weight = 0.5;
    CHECK(validate(QuestionNetwork(2, {0, 1}, p)).has(ViolationKind::kBadWeight));
    p[2].edges[1].weight = 1.0;
    p[0].edges[1].weight = 1.5;
    CHECK(validate(QuestionNetwork(2, {0, 1}, p)).has(ViolationKind::kBadWeight));
  }
}

TEST_CASE("canonicalize orders by layer and action and keeps semantics") {
  const QuestionNetwork base = hand_net();
  std::vector<PredictionNode> p(base.predictions().begin(), base.predictions().end());
  // Reverse the node order, remapping references.
  std::vector<PredictionNode> rev(p.rbegin(), p.rend());
  const int n = static_cast<int>(p.size());
  for (auto& node : rev) {
    for (auto& e : node.edges) {
      if (!e.target.is_feature()) e.target.index = n - 1 - e.target.index;
    }
  }
  const QuestionNetwork shuffled(2, {0, 1}, rev);
  CHECK(validate(shuffled).ok());
  const QuestionNetwork canon = canonicalize(shuffled);
  CHECK(canonicalize(hand_net()) == hand_net());
  // Ties keep their current order, so the two layer-0 nodes stay swapped.
  std::vector<PredictionNode> swapped = p;
  std::swap(swapped[0], swapped[1]);
  for (auto& node : swapped) {
    for (auto& e : node.edges) {
      if (!e.target.is_feature() && e.target.index < 2) e.target.index = 1 - e.target.index;
    }
  }
  CHECK(canon == QuestionNetwork(2, {0, 1}, swapped));
  CHECK(canonicalize(canon) == canon);
  for (int i = 1; i < canon.num_predictions(); ++i) {
    CHECK(canon.prediction(i - 1).layer <= canon.prediction(i).layer);
  }
}

TEST_CASE("serialization round trip") {
  const QuestionNetwork net = canonicalize(generate_random(fig_config()));
  const std::string text = serialize(net);
  CHECK(deserialize(text) == net);
  CHECK(serialize(deserialize(text)) == text);
  CHECK(text.find("\"version\": 1") != std::string::npos);
}

TEST_CASE("deserialize errors carry context") {
  CHECK_THROWS_WITH_AS(deserialize("{\"version\": 1,"), doctest::Contains("line"), ParseError);
  const std::string good = serialize(make_discounted_sum(1, 0.5));
  std::string bad = good;
  bad.replace(bad.find("\"target_index\": 0"), 17, "\"target_index\": 5");
  CHECK_THROWS_WITH_AS(deserialize(bad), doctest::Contains("predictions[0].edges"), ParseError);
  CHECK_THROWS_AS(deserialize("[]"), ParseError);
  std::string cond = serialize(make_full_tree(std::vector<int>{0}, 1));
  cond.replace(cond.find("\"condition\": 0"), 14, "\"condition\": 3");
  CHECK_THROWS_AS(deserialize(cond), ParseError);
}

TEST_CASE("dot export") {
  const std::string dot = to_dot(hand_net());
  CHECK(dot.rfind("digraph", 0) == 0);
  CHECK(dot.find("f0") != std::string::npos);
  CHECK(dot.find("p4") != std::string::npos);
  CHECK(dot.find("a=0") != std::string::npos);
}

}  // namespace
}  // namespace rgvf
