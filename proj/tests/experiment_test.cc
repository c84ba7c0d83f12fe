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
#include <filesystem>
#include <sstream>
#include <string>

#include "rgvf/errors.h"
#include "rgvf/experiment.h"

namespace rgvf::experiment {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rgvf_experiment_test_" + name);
  fs::remove_all(p);
  return p;
}

json minimal(const fs::path& out) {
  return {{"version", 1},
          {"seed", 5},
          {"output_dir", out.string()},
          {"question_net", {{"type", "full_tree"}, {"depth", 2}}},
          {"train", {{"total_frames", 1280}, {"eval_period", 640}}}};
}

std::string config_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST_CASE("config defaults and resolution") {
  const ExperimentConfig c = parse_config(minimal("out"));
  CHECK(c.kind == Kind::kEval);
  CHECK(c.seed == 5);
  CHECK(c.train.seed == 5);
  CHECK(c.train.n_actors == 8);
  CHECK(c.train.gamma_env == 0.98);
  CHECK(c.question_net.depth == 2);
  const json resolved = resolved_config(c);
  CHECK(resolved.at("code_version") == code_version());
  CHECK(resolved.at("train").at("lr_rl") == 1e-3);
  // Resolving is idempotent.
  CHECK(resolved_config(parse_config(resolved)) == resolved);
}

TEST_CASE("config errors name every offending field") {
  json doc = minimal("out");
  doc.erase("seed");
  CHECK(config_error(doc).find("seed: required") != std::string::npos);

  doc = minimal("out");
  doc["train"]["n_actors"] = 0;
  doc["train"]["optimizer"] = "sgd";
  doc["question_net"]["depht"] = 3;
  doc["features"] = {{"type", "random_linear"}, {"count", -1}};
  const std::string msg = config_error(doc);
  CHECK(msg.find("n_actors") != std::string::npos);
  CHECK(msg.find("train.optimizer") != std::string::npos);
  CHECK(msg.find("question_net.depht: unknown field") != std::string::npos);
  CHECK(msg.find("features.count") != std::string::npos);

  doc = minimal("out");
  doc["version"] = 2;
  CHECK(config_error(doc).find("version") != std::string::npos);
  doc = minimal("out");
  doc["seed"] = "five";
  CHECK(config_error(doc).find("seed") != std::string::npos);
  doc = minimal("out");
  doc["env"] = {{"goal", {0, 3}}};
  CHECK(config_error(doc).find("env.goal") != std::string::npos);
}

TEST_CASE("question network sources") {
  json doc = minimal("out");
  doc["question_net"] = {{"type", "discounted_sum"}, {"gamma", 0.8}};
  CHECK(build_task(parse_config(doc))->net.num_predictions() == 1);

  doc["question_net"] = {{"type", "random"}, {"depth", 4}, {"repeat", 1}};
  auto task = build_task(parse_config(doc));
  CHECK(task->net.num_predictions() == 17);

  doc["features"] = {{"type", "random_linear"}, {"count", 64}};
  doc["question_net"] = {{"type", "random"}, {"depth", 4}, {"repeat", 64}};
  task = build_task(parse_config(doc));
  CHECK(task->features.size() == 64);
  CHECK(task->net.num_predictions() == 64 + 4 * 64 * 4);

  doc["question_net"] = {{"type", "full_tree"}, {"depth", 1}};
  CHECK_THROWS_AS(build_task(parse_config(doc)), ConfigError);

  doc["question_net"] = {{"type", "none"}};
  CHECK_FALSE(build_task(parse_config(doc)).has_value());

  const fs::path dir = scratch("netfile");
  write_file(dir / "net.json", serialize(make_discounted_sum(1, 0.5)));
  doc = minimal("out");
  doc["question_net"] = {{"type", "file"}, {"path", "net.json"}};
  CHECK(build_task(parse_config(doc, dir))->net == make_discounted_sum(1, 0.5));
}

TEST_CASE("csv formats") {
  agent::MetricsRow row;
  row.frames = 64;
  row.value_mse = 0.1;
  row.answer_loss = 2.5;
  row.policy_entropy = 1.0;
  row.return_value = 0.25;
  CHECK(metrics_header(Kind::kEval) == "frames,value_mse,answer_loss");
  CHECK(metrics_line(row, Kind::kEval) == "64,0.1,2.5");
  CHECK(metrics_line(row, Kind::kControl) == "64,0.1,2.5,1,0.25");

  Eigen::VectorXd v(49);
  for (int s = 0; s < 49; ++s) v(s) = s;
  const std::string grid = grid_csv(v);
  std::istringstream in(grid);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
  }
  CHECK(lines == 7);
  CHECK(grid.rfind("0,1,2,3,4,5,6\n", 0) == 0);

  const std::string table = oracle_csv(Eigen::MatrixXd::Ones(49, 4));
  CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 49 * 4);
  CHECK(table.rfind("state_row,state_col,node_id,value\n1,1,0,1\n", 0) == 0);
  const std::string values = values_csv(v);
  CHECK(std::count(values.begin(), values.end(), '\n') == 50);
  CHECK_THROWS_AS(grid_csv(Eigen::VectorXd::Zero(3)), ShapeError);
}

TEST_CASE("run writes reproducible outputs") {
  const fs::path a = scratch("run_a");
  const fs::path b = scratch("run_b");
  const ExperimentConfig ca = parse_config(minimal(a));
  const ExperimentConfig cb = parse_config(minimal(b));
  run(ca);
  run(cb);
  CHECK(read_file(a / "metrics.csv") == read_file(b / "metrics.csv"));
  CHECK(read_file(a / "checkpoint.json") == read_file(b / "checkpoint.json"));
  CHECK(read_file(a / "metrics.csv").rfind("frames,value_mse,answer_loss\n0,", 0) == 0);

  // Re-running from the snapshot reproduces the outputs.
  const std::string metrics = read_file(a / "metrics.csv");
  const std::string snapshot = read_file(a / "resolved_config.json");
  run(load_config(a / "resolved_config.json"));
  CHECK(read_file(a / "metrics.csv") == metrics);
  CHECK(read_file(a / "resolved_config.json") == snapshot);

  const Checkpoint ckpt = load_checkpoint(a / "checkpoint.json");
  CHECK(ckpt.kind == Kind::kEval);
  CHECK(ckpt.agent.num_predictions() == 20);
  CHECK(oracle_values(ckpt).size() == 49);

  write_file(a / "broken.json", "{\"version\": 1, \"agent\": {}}");
  CHECK_THROWS_AS(load_checkpoint(a / "broken.json"), ParseError);
  write_file(a / "garbage.json", "not json");
  CHECK_THROWS_AS(load_checkpoint(a / "garbage.json"), ParseError);
}

TEST_CASE("control runs report entropy and return") {
  const fs::path dir = scratch("control");
  json doc = minimal(dir);
  doc["kind"] = "control";
  run(parse_config(doc));
  const std::string csv = read_file(dir / "metrics.csv");
  CHECK(csv.rfind("frames,value_mse,answer_loss,policy_entropy,return\n", 0) == 0);
  CHECK(load_checkpoint(dir / "checkpoint.json").agent.num_actions() == 4);
}

}  // namespace
}  // namespace rgvf::experiment
