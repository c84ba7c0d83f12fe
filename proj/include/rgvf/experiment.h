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

#ifndef RGVF_EXPERIMENT_H_
#define RGVF_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "rgvf/agent.h"
#include "rgvf/features.h"
#include "rgvf/oracle.h"
#include "rgvf/qnet.h"

namespace rgvf::experiment {

inline constexpr int kConfigVersion = 1;

// Library version string recorded next to every output.
std::string code_version();

enum class Kind { kEval, kControl };

// Where the question network comes from.
struct NetSource {
  std::string type = "none";  // none | discounted_sum | full_tree | random | file
  double gamma = 0.8;
  int depth = 1;
  int repeat = 1;
  std::vector<int> actions = {0, 1, 2, 3};
  std::uint64_t seed = 0;
  std::string path;
};

struct ExperimentConfig {
  Kind kind = Kind::kEval;
  std::uint64_t seed = 0;
  std::string output_dir = "run";
  NetSource question_net;
  FeatureSpec features = TouchSpec{};
  agent::TrainConfig train;
};

// Parses a config document. Relative file paths resolve against base_dir.
// Every offending field is reported in one ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// All fields materialized, plus the code version.
nlohmann::json resolved_config(const ExperimentConfig& config);

// Nothing when the config asks for no question network.
std::optional<agent::AuxiliaryTask> build_task(const ExperimentConfig& config);

FeatureFunction build_features(const FeatureSpec& spec);

std::string metrics_header(Kind kind);
std::string metrics_line(const agent::MetricsRow& row, Kind kind);

// Trains and writes metrics.csv, checkpoint.json and resolved_config.json
// into config.output_dir. Returns the metrics.
std::vector<agent::MetricsRow> run(const ExperimentConfig& config);

struct Checkpoint {
  Kind kind = Kind::kEval;
  double gamma_env = 0.98;
  envs::RoomConfig room;
  agent::AgentNet agent;
};

nlohmann::json to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Exact values of the policy the checkpoint evaluates: uniform random for
// eval runs, the agent's own softmax policy for control runs.
Eigen::VectorXd oracle_values(const Checkpoint& checkpoint);

// 7 lines of 7 comma-separated values, row-major over interior cells.
std::string grid_csv(const Eigen::VectorXd& state_values);

// Header state_row,state_col,node_id,value; one line per (state, node).
std::string oracle_csv(const Eigen::MatrixXd& gvf_values);

// Header state_row,state_col,value; one line per state.
std::string values_csv(const Eigen::VectorXd& values);

// Shortest round-trip representation of a double.
std::string format_double(double x);

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace rgvf::experiment

#endif  // RGVF_EXPERIMENT_H_
