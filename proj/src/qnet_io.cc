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

#include <algorithm>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rgvf/errors.h"
#include "rgvf/qnet.h"

namespace rgvf {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ParseError("question network: " + field + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing field");
  return *it;
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

}  // namespace

std::string serialize(const QuestionNetwork& input) {
  const QuestionNetwork net = canonicalize(input);
  json doc;
  doc["version"] = kFormatVersion;
  doc["n_features"] = net.num_features();
  doc["actions"] = net.actions();
  json predictions = json::array();
  for (const auto& node : net.predictions()) {
    json p;
    p["layer"] = node.layer;
    if (node.condition) p["condition"] = *node.condition;
    json edges = json::array();
    for (const Edge& e : node.edges) {
      edges.push_back({{"target_kind", e.target.is_feature() ? "feature" : "prediction"},
                       {"target_index", e.target.index},
                       {"weight", e.weight}});
    }
    p["edges"] = std::move(edges);
    predictions.push_back(std::move(p));
  }
  doc["predictions"] = std::move(predictions);
  return doc.dump(2) + "\n";
}

QuestionNetwork deserialize(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("question network: malformed JSON at " + line_column(text, e.byte) +
                     ": " + e.what());
  }
  const int version = as_int(require(doc, "version", "$"), "version");
  if (version != kFormatVersion) {
    fail("version", "unsupported version " + std::to_string(version));
  }
  const int n_features = as_int(require(doc, "n_features", "$"), "n_features");
  if (n_features < 0) fail("n_features", "must be nonnegative");

  const json& actions_json = require(doc, "actions", "$");
  if (!actions_json.is_array()) fail("actions", "expected an array");
  std::vector<int> actions;
  for (std::size_t i = 0; i < actions_json.size(); ++i) {
    actions.push_back(as_int(actions_json[i], "actions[" + std::to_string(i) + "]"));
  }

  const json& preds_json = require(doc, "predictions", "$");
  if (!preds_json.is_array()) fail("predictions", "expected an array");
  const int n_p = static_cast<int>(preds_json.size());
  std::vector<PredictionNode> nodes;
  for (int i = 0; i < n_p; ++i) {
    const std::string path = "predictions[" + std::to_string(i) + "]";
    const json& p = preds_json[i];
    PredictionNode node;
    node.layer = as_int(require(p, "layer", path), path + ".layer");
    if (auto it = p.find("condition"); it != p.end() && !it->is_null()) {
      const int a = as_int(*it, path + ".condition");
      if (std::find(actions.begin(), actions.end(), a) == actions.end()) {
        fail(path + ".condition", "unknown action id " + std::to_string(a));
      }
      node.condition = a;
    }
    const json& edges = require(p, "edges", path);
    if (!edges.is_array()) fail(path + ".edges", "expected an array");
    for (std::size_t j = 0; j < edges.size(); ++j) {
      const std::string epath = path + ".edges[" + std::to_string(j) + "]";
      const json& kind_json = require(edges[j], "target_kind", epath);
      if (!kind_json.is_string()) fail(epath + ".target_kind", "expected a string");
      const std::string kind = kind_json.get<std::string>();
      Edge e;
      const int index = as_int(require(edges[j], "target_index", epath), epath + ".target_index");
      if (kind == "feature") {
        if (index < 0 || index >= n_features) fail(epath + ".target_index", "no such feature");
        e.target = NodeId::feature(index);
      } else if (kind == "prediction") {
        if (index < 0 || index >= n_p) fail(epath + ".target_index", "no such prediction");
        e.target = NodeId::prediction(index);
      } else {
        fail(epath + ".target_kind", "expected \"feature\" or \"prediction\"");
      }
      const json& w = require(edges[j], "weight", epath);
      if (!w.is_number()) fail(epath + ".weight", "expected a number");
      e.weight = w.get<double>();
      node.edges.push_back(e);
    }
    nodes.push_back(std::move(node));
  }
  return QuestionNetwork(n_features, std::move(actions), std::move(nodes));
}

std::string to_dot(const QuestionNetwork& net) {
  std::ostringstream out;
  out << "digraph question_network {\n";
  for (int k = 0; k < net.num_features(); ++k) {
    out << "  f" << k << " [shape=box, label=\"f" << k << "\"];\n";
  }
  for (int i = 0; i < net.num_predictions(); ++i) {
    const auto& node = net.prediction(i);
    out << "  p" << i << " [shape=circle, label=\"" << i;
    if (node.condition) out << "\\na=" << *node.condition;
    out << "\"];\n";
  }
  for (int i = 0; i < net.num_predictions(); ++i) {
    for (const Edge& e : net.prediction(i).edges) {
      out << "  p" << i << " -> " << (e.target.is_feature() ? "f" : "p") << e.target.index
          << " [label=\"" << e.weight << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace rgvf
