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

// Command-line entry point: generate, train, heatmap, oracle.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rgvf/errors.h"
#include "rgvf/experiment.h"
#include "rgvf/oracle.h"
#include "rgvf/qnet.h"

namespace {

using namespace rgvf;
namespace ex = rgvf::experiment;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

int cmd_generate(const GeneratorConfig& g, const std::string& output) {
  const QuestionNetwork net = generate_random(g);
  const std::string text = serialize(net);
  if (output.empty() || output == "-") {
    std::cout << text;
  } else {
    ex::write_file(output, text);
  }
  const std::vector<int> sizes = net.layer_sizes();
  std::cerr << "predictions: " << net.num_predictions() << "\n";
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    std::cerr << "layer " << l << ": " << sizes[l] << "\n";
  }
  return 0;
}

struct TrainOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  std::optional<long> total_frames;
};

int cmd_train(const TrainOptions& o) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ex::read_file(o.config));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(o.config + ": " + e.what());
  }
  if (doc.is_object()) {
    if (o.seed) doc["seed"] = *o.seed;
    if (!o.output_dir.empty()) doc["output_dir"] = o.output_dir;
    if (o.total_frames) doc["train"]["total_frames"] = *o.total_frames;
  }
  const ex::ExperimentConfig config =
      ex::parse_config(doc, std::filesystem::path(o.config).parent_path());
  const auto metrics = ex::run(config);
  const auto& last = metrics.back();
  std::cerr << "frames " << last.frames << " value_mse " << ex::format_double(last.value_mse)
            << " -> " << config.output_dir << "\n";
  return 0;
}

struct HeatmapOptions {
  std::string checkpoint;
  bool oracle_only = false;
  double gamma = 0.98;
  std::string output;
  std::string oracle_output;
};

int cmd_heatmap(const HeatmapOptions& o) {
  if (o.oracle_only) {
    const envs::ExactModel model = envs::exact_model(envs::EmptyRoom());
    ex::write_file(o.output, ex::grid_csv(oracle::true_values(model, o.gamma)));
    return 0;
  }
  if (o.checkpoint.empty()) throw ConfigError("heatmap needs --checkpoint or --oracle-only");
  const ex::Checkpoint ckpt = ex::load_checkpoint(o.checkpoint);
  const auto out = ckpt.agent.predict(agent::all_state_observations());
  ex::write_file(o.output, ex::grid_csv(out.value));
  std::string oracle_path = o.oracle_output;
  if (oracle_path.empty()) {
    const std::filesystem::path p(o.output);
    oracle_path = (p.parent_path() / (p.stem().string() + "_oracle" + p.extension().string()))
                      .string();
  }
  ex::write_file(oracle_path, ex::grid_csv(ex::oracle_values(ckpt)));
  return 0;
}

struct OracleOptions {
  std::string net_file;
  std::string constructor;
  GeneratorConfig gen;
  std::string features = "touch";
  int feature_count = 1;
  std::uint64_t feature_seed = 0;
  double gamma_env = 0.98;
  std::string output;
  std::string values_output;
};

int cmd_oracle(const OracleOptions& o) {
  FeatureSpec spec = TouchSpec{};
  if (o.features == "random_linear") {
    RandomLinearSpec s;
    s.count = o.feature_count;
    s.seed = o.feature_seed;
    spec = s;
  } else if (o.features != "touch") {
    throw UnsupportedFeatureError("unsupported feature spec: " + o.features);
  }
  const FeatureFunction features = ex::build_features(spec);

  QuestionNetwork net;
  if (!o.net_file.empty()) {
    net = deserialize(ex::read_file(o.net_file));
  } else if (o.constructor == "discounted_sum") {
    net = make_discounted_sum(features.size(), o.gen.gamma);
  } else if (o.constructor == "full_tree") {
    net = make_full_tree(o.gen.actions, o.gen.depth);
  } else if (o.constructor == "random") {
    GeneratorConfig g = o.gen;
    g.n_features = features.size();
    net = generate_random(g);
  } else {
    throw ConfigError("oracle needs --net or --constructor discounted_sum|full_tree|random");
  }
  const ValidationReport report = validate(net);
  if (!report.ok()) throw ConfigError("invalid question network:\n" + report.to_string());

  const envs::ExactModel model = envs::exact_model(envs::EmptyRoom());
  const oracle::FeatureTable table = oracle::feature_table(features, model);
  const oracle::GvfSolution gvf = oracle::exact_gvf_values(net, model, table);
  const std::string text = ex::oracle_csv(gvf.values);
  if (o.output.empty() || o.output == "-") {
    std::cout << text;
  } else {
    ex::write_file(o.output, text);
  }
  if (!o.values_output.empty()) {
    ex::write_file(o.values_output, ex::values_csv(oracle::true_values(model, o.gamma_env)));
  }
  std::cerr << "nodes: " << net.num_predictions() << " residual: " << gvf.residual << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random GVF question networks on a grid-world room"};
  app.set_version_flag("--version", experiment::code_version());
  app.require_subcommand(1);

  GeneratorConfig gen;
  std::string gen_output;
  auto* generate = app.add_subcommand("generate", "Sample a random question network");
  generate->add_option("--features", gen.n_features, "Number of feature nodes")->required();
  generate->add_option("--actions", gen.actions, "Action ids, or a single count n for 0..n-1")
      ->required();
  generate->add_option("--depth", gen.depth, "Action-conditioned layers")->required();
  generate->add_option("--repeat", gen.repeat, "Nodes per action per layer")->required();
  generate->add_option("--gamma", gen.gamma, "Layer-0 self-loop weight")->required();
  generate->add_option("--seed", gen.seed, "Sampling seed")->required();
  generate->add_option("-o,--output", gen_output, "Output file (stdout if omitted)");

  TrainOptions train_opts;
  auto* train = app.add_subcommand("train", "Train an agent from a config file");
  train->add_option("config", train_opts.config, "Experiment config (JSON)")->required();
  train->add_option("--seed", train_opts.seed, "Override the config seed");
  train->add_option("--output-dir", train_opts.output_dir, "Override the output directory");
  train->add_option("--total-frames", train_opts.total_frames, "Override train.total_frames");

  HeatmapOptions heat_opts;
  auto* heatmap = app.add_subcommand("heatmap", "Write 7x7 value grids");
  heatmap->add_option("--checkpoint", heat_opts.checkpoint, "checkpoint.json from train");
  heatmap->add_flag("--oracle-only", heat_opts.oracle_only,
                    "Write only the exact random-policy values");
  heatmap->add_option("--gamma", heat_opts.gamma, "Discount for --oracle-only");
  heatmap->add_option("-o,--output", heat_opts.output, "Grid CSV")->required();
  heatmap->add_option("--oracle-output", heat_opts.oracle_output,
                      "Oracle grid CSV (default: <output>_oracle.csv)");

  OracleOptions oracle_opts;
  oracle_opts.gen.actions = {0, 1, 2, 3};
  oracle_opts.gen.depth = 1;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact GVF values on the room");
  oracle_cmd->add_option("--net", oracle_opts.net_file, "Question network file");
  oracle_cmd->add_option("--constructor", oracle_opts.constructor,
                         "discounted_sum, full_tree or random");
  oracle_cmd->add_option("--gamma", oracle_opts.gen.gamma, "Constructor discount");
  oracle_cmd->add_option("--depth", oracle_opts.gen.depth, "Constructor depth");
  oracle_cmd->add_option("--repeat", oracle_opts.gen.repeat, "Generator repeat");
  oracle_cmd->add_option("--actions", oracle_opts.gen.actions, "Constructor action ids");
  oracle_cmd->add_option("--seed", oracle_opts.gen.seed, "Generator seed");
  oracle_cmd->add_option("--features", oracle_opts.features, "touch or random_linear");
  oracle_cmd->add_option("--feature-count", oracle_opts.feature_count,
                         "Random feature count");
  oracle_cmd->add_option("--feature-seed", oracle_opts.feature_seed, "Random feature seed");
  oracle_cmd->add_option("--gamma-env", oracle_opts.gamma_env, "Discount for --values-output");
  oracle_cmd->add_option("-o,--output", oracle_opts.output, "GVF CSV (stdout if omitted)");
  oracle_cmd->add_option("--values-output", oracle_opts.values_output,
                         "True random-policy state values CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*generate) {
      // A single value n stands for the action set 0..n-1.
      if (gen.actions.size() == 1 && gen.actions[0] > 0) {
        const int n = gen.actions[0];
        gen.actions.clear();
        for (int a = 0; a < n; ++a) gen.actions.push_back(a);
      }
      return cmd_generate(gen, gen_output);
    }
    if (*train) return cmd_train(train_opts);
    if (*heatmap) return cmd_heatmap(heat_opts);
    if (*oracle_cmd) return cmd_oracle(oracle_opts);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
