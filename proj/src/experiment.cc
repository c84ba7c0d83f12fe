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

#include "rgvf/experiment.h"

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "rgvf/errors.h"

namespace rgvf::experiment {

using nlohmann::json;

std::string code_version() { return std::string("rgvf ") + RGVF_VERSION; }

namespace {

// Collects every problem in a config document instead of stopping at the
// first one.
class Reader {
 public:
  void fail(const std::string& path, const std::string& what) {
    errors_.push_back(path + ": " + what);
  }

  bool object(const json& doc, const std::string& path) {
    if (doc.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  void known_keys(const json& obj, const std::string& path,
                  std::initializer_list<const char*> keys) {
    for (const auto& item : obj.items()) {
      bool found = false;
      for (const char* k : keys) found = found || item.key() == k;
      if (!found) fail(join(path, item.key()), "unknown field");
    }
  }

  template <typename T>
  void read(const json& obj, const std::string& path, const char* key, T& out,
            bool required = false) {
    const std::string where = join(path, key);
    if (!obj.contains(key)) {
      if (required) fail(where, "required field is missing");
      return;
    }
    convert(obj.at(key), where, out);
  }

  void check(bool ok, const std::string& path, const std::string& what) {
    if (!ok) fail(path, what);
  }

  void finish() const {
    if (errors_.empty()) return;
    std::ostringstream msg;
    msg << "invalid config:";
    for (const auto& e : errors_) msg << "\n  " << e;
    throw ConfigError(msg.str());
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  void convert(const json& v, const std::string& where, bool& out) {
    if (v.is_boolean()) out = v.get<bool>();
    else fail(where, "expected a boolean");
  }
  void convert(const json& v, const std::string& where, int& out) {
    if (v.is_number_integer() && v.get<long long>() >= INT32_MIN &&
        v.get<long long>() <= INT32_MAX) {
      out = v.get<int>();
    } else {
      fail(where, "expected an integer");
    }
  }
  void convert(const json& v, const std::string& where, long& out) {
    if (v.is_number_integer()) out = v.get<long>();
    else fail(where, "expected an integer");
  }
  void convert(const json& v, const std::string& where, std::uint64_t& out) {
    if (v.is_number_unsigned()) out = v.get<std::uint64_t>();
    else if (v.is_number_integer() && v.get<long long>() >= 0) out = v.get<long long>();
    else fail(where, "expected a non-negative integer");
  }
  void convert(const json& v, const std::string& where, double& out) {
    if (v.is_number()) out = v.get<double>();
    else fail(where, "expected a number");
  }
  void convert(const json& v, const std::string& where, std::string& out) {
    if (v.is_string()) out = v.get<std::string>();
    else fail(where, "expected a string");
  }
  void convert(const json& v, const std::string& where, std::vector<int>& out) {
    if (!v.is_array()) {
      fail(where, "expected an array of integers");
      return;
    }
    std::vector<int> values;
    for (std::size_t i = 0; i < v.size(); ++i) {
      int x = 0;
      convert(v[i], where + "[" + std::to_string(i) + "]", x);
      values.push_back(x);
    }
    out = values;
  }
  void convert(const json& v, const std::string& where, envs::Cell& out) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
        !v[1].is_number_integer()) {
      fail(where, "expected [row, col]");
      return;
    }
    out = {v[0].get<int>(), v[1].get<int>()};
  }

  std::vector<std::string> errors_;
};

json cell_json(envs::Cell c) { return json::array({c.row, c.col}); }

json room_json(const envs::RoomConfig& room) {
  return {{"goal", cell_json(room.goal)},
          {"start", cell_json(room.start)},
          {"random_start", room.random_start},
          {"reward_on_blocked_goal", room.reward_on_blocked_goal}};
}

void read_room(Reader& r, const json& doc, const std::string& path, envs::RoomConfig& room) {
  if (!r.object(doc, path)) return;
  r.known_keys(doc, path, {"goal", "start", "random_start", "reward_on_blocked_goal"});
  r.read(doc, path, "goal", room.goal);
  r.read(doc, path, "start", room.start);
  r.read(doc, path, "random_start", room.random_start);
  r.read(doc, path, "reward_on_blocked_goal", room.reward_on_blocked_goal);
  r.check(envs::EmptyRoom::is_interior(room.goal), path + ".goal", "not an interior cell");
  r.check(envs::EmptyRoom::is_interior(room.start), path + ".start", "not an interior cell");
}

const char* kind_name(Kind kind) { return kind == Kind::kEval ? "eval" : "control"; }

}  // namespace

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  Reader r;
  ExperimentConfig c;
  if (!r.object(doc, "config")) r.finish();
  r.known_keys(doc, "", {"version", "kind", "seed", "output_dir", "env", "question_net",
                         "features", "agent", "train", "code_version"});

  int version = 0;
  r.read(doc, "", "version", version, true);
  if (doc.contains("version")) {
    r.check(version == kConfigVersion, "version",
            "unsupported version " + std::to_string(version));
  }
  std::string kind = "eval";
  r.read(doc, "", "kind", kind);
  r.check(kind == "eval" || kind == "control", "kind", "expected \"eval\" or \"control\"");
  c.kind = kind == "control" ? Kind::kControl : Kind::kEval;
  r.read(doc, "", "seed", c.seed, true);
  r.read(doc, "", "output_dir", c.output_dir);
  r.check(!c.output_dir.empty(), "output_dir", "must not be empty");

  if (doc.contains("env")) read_room(r, doc.at("env"), "env", c.train.room);

  // Question network.
  NetSource& q = c.question_net;
  q.seed = mix_seed(c.seed, 11);
  if (doc.contains("question_net") && r.object(doc.at("question_net"), "question_net")) {
    const json& qn = doc.at("question_net");
    const std::string p = "question_net";
    r.read(qn, p, "type", q.type, true);
    if (q.type == "none") {
      r.known_keys(qn, p, {"type"});
    } else if (q.type == "discounted_sum") {
      r.known_keys(qn, p, {"type", "gamma"});
      r.read(qn, p, "gamma", q.gamma);
    } else if (q.type == "full_tree") {
      r.known_keys(qn, p, {"type", "depth", "actions"});
      r.read(qn, p, "depth", q.depth);
      r.read(qn, p, "actions", q.actions);
      r.check(q.depth >= 1, p + ".depth", "must be >= 1");
    } else if (q.type == "random") {
      r.known_keys(qn, p, {"type", "gamma", "depth", "repeat", "actions", "seed"});
      r.read(qn, p, "gamma", q.gamma);
      r.read(qn, p, "depth", q.depth);
      r.read(qn, p, "repeat", q.repeat);
      r.read(qn, p, "actions", q.actions);
      r.read(qn, p, "seed", q.seed);
    } else if (q.type == "file") {
      r.known_keys(qn, p, {"type", "path"});
      r.read(qn, p, "path", q.path, true);
      if (!q.path.empty()) {
        q.path = std::filesystem::absolute(base_dir / q.path).lexically_normal().string();
      }
    } else {
      r.fail(p + ".type", "expected none, discounted_sum, full_tree, random or file");
    }
    if (q.type == "discounted_sum" || q.type == "random") {
      r.check(q.gamma > 0.0 && q.gamma <= 1.0, p + ".gamma", "must be in (0, 1]");
    }
    if (q.type == "full_tree" || q.type == "random") {
      for (int a : q.actions) {
        r.check(a >= 0 && a < envs::kNumActions, p + ".actions",
                "action " + std::to_string(a) + " is not a room action");
      }
    }
  }

  // Features.
  std::uint64_t feature_seed = mix_seed(c.seed, 12);
  if (doc.contains("features") && r.object(doc.at("features"), "features")) {
    const json& f = doc.at("features");
    const std::string p = "features";
    std::string type;
    r.read(f, p, "type", type, true);
    if (type == "touch") {
      r.known_keys(f, p, {"type"});
      c.features = TouchSpec{};
    } else if (type == "random_linear") {
      r.known_keys(f, p, {"type", "count", "seed", "weight_scale", "channels"});
      RandomLinearSpec s;
      s.seed = feature_seed;
      r.read(f, p, "count", s.count);
      r.read(f, p, "seed", s.seed);
      r.read(f, p, "weight_scale", s.weight_scale);
      r.read(f, p, "channels", s.channels);
      r.check(s.count >= 1, p + ".count", "must be >= 1");
      r.check(s.weight_scale > 0.0, p + ".weight_scale", "must be positive");
      c.features = s;
    } else if (type == "random_patch") {
      r.known_keys(f, p, {"type", "patch_rows", "patch_cols", "functions_per_patch", "seed",
                          "weight_scale"});
      RandomPatchSpec s;
      s.seed = feature_seed;
      r.read(f, p, "patch_rows", s.patch_rows);
      r.read(f, p, "patch_cols", s.patch_cols);
      r.read(f, p, "functions_per_patch", s.functions_per_patch);
      r.read(f, p, "seed", s.seed);
      r.read(f, p, "weight_scale", s.weight_scale);
      c.features = s;
    } else {
      r.fail(p + ".type", "expected touch, random_linear or random_patch");
    }
  }

  // Agent and training.
  agent::TrainConfig& t = c.train;
  if (doc.contains("agent") && r.object(doc.at("agent"), "agent")) {
    const json& a = doc.at("agent");
    const std::string p = "agent";
    r.known_keys(a, p, {"repr_layers", "head_hidden", "representation", "stop_gradient"});
    r.read(a, p, "repr_layers", t.arch.repr_layers);
    r.read(a, p, "head_hidden", t.arch.head_hidden);
    std::string repr = "learned";
    r.read(a, p, "representation", repr);
    r.check(repr == "learned" || repr == "frozen", p + ".representation",
            "expected \"learned\" or \"frozen\"");
    t.representation =
        repr == "frozen" ? agent::Representation::kFrozen : agent::Representation::kLearned;
    r.read(a, p, "stop_gradient", t.stop_gradient);
  }
  if (doc.contains("train") && r.object(doc.at("train"), "train")) {
    const json& tr = doc.at("train");
    const std::string p = "train";
    r.known_keys(tr, p, {"n_actors", "rollout_len", "gamma_env", "lr_rl", "lr_answer",
                         "optimizer", "total_frames", "eval_period", "answer_mix",
                         "entropy_coef", "value_coef", "max_grad_norm"});
    r.read(tr, p, "n_actors", t.n_actors);
    r.read(tr, p, "rollout_len", t.rollout_len);
    r.read(tr, p, "gamma_env", t.gamma_env);
    r.read(tr, p, "lr_rl", t.lr_rl);
    r.read(tr, p, "lr_answer", t.lr_answer);
    std::string opt = "adam";
    r.read(tr, p, "optimizer", opt);
    r.check(opt == "adam" || opt == "rmsprop", p + ".optimizer",
            "expected \"adam\" or \"rmsprop\"");
    t.optimizer = opt == "rmsprop" ? agent::OptimizerKind::kRmsProp : agent::OptimizerKind::kAdam;
    r.read(tr, p, "total_frames", t.total_frames);
    r.read(tr, p, "eval_period", t.eval_period);
    r.read(tr, p, "answer_mix", t.answer_mix);
    r.read(tr, p, "entropy_coef", t.entropy_coef);
    r.read(tr, p, "value_coef", t.value_coef);
    r.read(tr, p, "max_grad_norm", t.max_grad_norm);
  }
  t.seed = c.seed;
  try {
    agent::check_train_config(t);
  } catch (const ConfigError& e) {
    r.fail("train", e.what());
  }
  r.finish();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

json resolved_config(const ExperimentConfig& c) {
  json doc;
  doc["version"] = kConfigVersion;
  doc["code_version"] = code_version();
  doc["kind"] = kind_name(c.kind);
  doc["seed"] = c.seed;
  doc["output_dir"] = c.output_dir;
  doc["env"] = room_json(c.train.room);

  const NetSource& q = c.question_net;
  json qn = {{"type", q.type}};
  if (q.type == "discounted_sum") {
    qn["gamma"] = q.gamma;
  } else if (q.type == "full_tree") {
    qn["depth"] = q.depth;
    qn["actions"] = q.actions;
  } else if (q.type == "random") {
    qn["gamma"] = q.gamma;
    qn["depth"] = q.depth;
    qn["repeat"] = q.repeat;
    qn["actions"] = q.actions;
    qn["seed"] = q.seed;
  } else if (q.type == "file") {
    qn["path"] = q.path;
  }
  doc["question_net"] = qn;

  if (const auto* s = std::get_if<RandomLinearSpec>(&c.features)) {
    doc["features"] = {{"type", "random_linear"},
                       {"count", s->count},
                       {"seed", s->seed},
                       {"weight_scale", s->weight_scale},
                       {"channels", s->channels}};
  } else if (const auto* s = std::get_if<RandomPatchSpec>(&c.features)) {
    doc["features"] = {{"type", "random_patch"},
                       {"patch_rows", s->patch_rows},
                       {"patch_cols", s->patch_cols},
                       {"functions_per_patch", s->functions_per_patch},
                       {"seed", s->seed},
                       {"weight_scale", s->weight_scale}};
  } else {
    doc["features"] = {{"type", "touch"}};
  }

  const agent::TrainConfig& t = c.train;
  doc["agent"] = {
      {"repr_layers", t.arch.repr_layers},
      {"head_hidden", t.arch.head_hidden},
      {"representation",
       t.representation == agent::Representation::kFrozen ? "frozen" : "learned"},
      {"stop_gradient", t.stop_gradient}};
  doc["train"] = {
      {"n_actors", t.n_actors},
      {"rollout_len", t.rollout_len},
      {"gamma_env", t.gamma_env},
      {"lr_rl", t.lr_rl},
      {"lr_answer", t.lr_answer},
      {"optimizer", t.optimizer == agent::OptimizerKind::kRmsProp ? "rmsprop" : "adam"},
      {"total_frames", t.total_frames},
      {"eval_period", t.eval_period},
      {"answer_mix", t.answer_mix},
      {"entropy_coef", t.entropy_coef},
      {"value_coef", t.value_coef},
      {"max_grad_norm", t.max_grad_norm}};
  return doc;
}

FeatureFunction build_features(const FeatureSpec& spec) {
  return FeatureFunction(spec, envs::EmptyRoom::observation_shape());
}

std::optional<agent::AuxiliaryTask> build_task(const ExperimentConfig& c) {
  const NetSource& q = c.question_net;
  if (q.type == "none") return std::nullopt;
  FeatureFunction features = build_features(c.features);
  QuestionNetwork net;
  if (q.type == "discounted_sum") {
    net = make_discounted_sum(features.size(), q.gamma);
  } else if (q.type == "full_tree") {
    if (features.size() != 1) {
      throw ConfigError("full_tree question networks read exactly one feature, got " +
                        std::to_string(features.size()));
    }
    net = make_full_tree(q.actions, q.depth);
  } else if (q.type == "random") {
    GeneratorConfig g;
    g.n_features = features.size();
    g.gamma = q.gamma;
    g.actions = q.actions;
    g.depth = q.depth;
    g.repeat = q.repeat;
    g.seed = q.seed;
    net = generate_random(g);
  } else if (q.type == "file") {
    net = deserialize(read_file(q.path));
  } else {
    throw ConfigError("unknown question_net type: " + q.type);
  }
  return agent::AuxiliaryTask{std::move(net), std::move(features)};
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string metrics_header(Kind kind) {
  std::string h = "frames,value_mse,answer_loss";
  if (kind == Kind::kControl) h += ",policy_entropy,return";
  return h;
}

std::string metrics_line(const agent::MetricsRow& row, Kind kind) {
  std::string line = std::to_string(row.frames) + "," + format_double(row.value_mse) + "," +
                     format_double(row.answer_loss);
  if (kind == Kind::kControl) {
    line += "," + format_double(row.policy_entropy) + "," + format_double(row.return_value);
  }
  return line;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<agent::MetricsRow> run(const ExperimentConfig& config) {
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  write_file(dir / "resolved_config.json", resolved_config(config).dump(2) + "\n");

  const std::optional<agent::AuxiliaryTask> task = build_task(config);
  std::ofstream metrics(dir / "metrics.csv", std::ios::binary);
  if (!metrics) throw ConfigError("cannot write " + (dir / "metrics.csv").string());
  metrics << metrics_header(config.kind) << "\n";
  const agent::MetricsSink sink = [&](const agent::MetricsRow& row) {
    metrics << metrics_line(row, config.kind) << "\n";
    metrics.flush();
  };
  const agent::AuxiliaryTask* task_ptr = task ? &*task : nullptr;
  agent::TrainResult result = config.kind == Kind::kEval
                                  ? agent::evaluate_policy_train(task_ptr, config.train, sink)
                                  : agent::actor_critic_train(task_ptr, config.train, sink);

  Checkpoint ckpt;
  ckpt.kind = config.kind;
  ckpt.gamma_env = config.train.gamma_env;
  ckpt.room = config.train.room;
  ckpt.agent = std::move(result.agent);
  write_file(dir / "checkpoint.json", to_json(ckpt).dump() + "\n");
  return result.metrics;
}

json to_json(const Checkpoint& c) {
  return {{"version", 1},
          {"code_version", code_version()},
          {"kind", kind_name(c.kind)},
          {"gamma_env", c.gamma_env},
          {"env", room_json(c.room)},
          {"agent", agent::to_json(c.agent)}};
}

Checkpoint checkpoint_from_json(const json& doc) {
  Checkpoint c;
  try {
    if (doc.at("version").get<int>() != 1) throw ParseError("unsupported checkpoint version");
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind != "eval" && kind != "control") throw ParseError("checkpoint kind: " + kind);
    c.kind = kind == "control" ? Kind::kControl : Kind::kEval;
    c.gamma_env = doc.at("gamma_env").get<double>();
    if (!(c.gamma_env >= 0.0 && c.gamma_env < 1.0)) throw ParseError("checkpoint gamma_env");
    Reader r;
    read_room(r, doc.at("env"), "env", c.room);
    r.finish();
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  c.agent = agent::agent_from_json(doc.at("agent"));
  if (c.agent.repr.input_size() != envs::EmptyRoom::kObservationSize) {
    throw ParseError("checkpoint agent does not read room observations");
  }
  if (c.kind == Kind::kControl && c.agent.num_actions() != envs::kNumActions) {
    throw ParseError("control checkpoint needs a policy head over the room's actions");
  }
  return c;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("agent")) {
    throw ParseError(path.string() + ": not a checkpoint");
  }
  return checkpoint_from_json(doc);
}

Eigen::VectorXd oracle_values(const Checkpoint& c) {
  const envs::ExactModel model = envs::exact_model(envs::EmptyRoom(c.room));
  if (c.kind == Kind::kEval) return oracle::true_values(model, c.gamma_env);
  const agent::AgentNet::Output out = c.agent.predict(agent::all_state_observations());
  return agent::policy_values(model, out.policy_logits, c.gamma_env);
}

std::string grid_csv(const Eigen::VectorXd& v) {
  constexpr int n = envs::EmptyRoom::kInteriorSize;
  if (v.size() != n * n) throw ShapeError("grid_csv expects one value per room state");
  std::string out;
  for (int r = 0; r < n; ++r) {
    for (int col = 0; col < n; ++col) {
      if (col) out += ",";
      out += format_double(v(r * n + col));
    }
    out += "\n";
  }
  return out;
}

std::string oracle_csv(const Eigen::MatrixXd& gvf) {
  if (gvf.rows() != envs::EmptyRoom::kNumStates) {
    throw ShapeError("oracle_csv expects one row per room state");
  }
  std::string out = "state_row,state_col,node_id,value\n";
  for (int s = 0; s < gvf.rows(); ++s) {
    const envs::Cell cell = envs::EmptyRoom::cell_of(s);
    const std::string prefix = std::to_string(cell.row) + "," + std::to_string(cell.col) + ",";
    for (Eigen::Index j = 0; j < gvf.cols(); ++j) {
      out += prefix + std::to_string(j) + "," + format_double(gvf(s, j)) + "\n";
    }
  }
  return out;
}

std::string values_csv(const Eigen::VectorXd& values) {
  if (values.size() != envs::EmptyRoom::kNumStates) {
    throw ShapeError("values_csv expects one value per room state");
  }
  std::string out = "state_row,state_col,value\n";
  for (int s = 0; s < values.size(); ++s) {
    const envs::Cell cell = envs::EmptyRoom::cell_of(s);
    out += std::to_string(cell.row) + "," + std::to_string(cell.col) + "," +
           format_double(values(s)) + "\n";
  }
  return out;
}

}  // namespace rgvf::experiment
