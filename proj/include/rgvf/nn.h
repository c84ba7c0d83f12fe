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

#ifndef RGVF_NN_H_
#define RGVF_NN_H_

#include <functional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "rgvf/random.h"

namespace rgvf::nn {

enum class Activation { kIdentity, kRelu };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::kIdentity;
};

// Per-layer values recorded by a forward pass. Rows are batch samples.
struct Tape {
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> pre_activations;
};

class DenseNet;

struct Gradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;

  static Gradients zeros_like(const DenseNet& net);
  void add(const Gradients& other);
  void scale(double factor);
  double squared_norm() const;
  Eigen::VectorXd flatten() const;  // same order as DenseNet::parameters()
};

// A stack of affine layers with elementwise activations. Inputs are batches
// with one sample per row.
class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  // Hidden layers use ReLU. Weights are drawn from U[-b, b] with
  // b = sqrt(6 / fan_in) for ReLU layers and sqrt(3 / fan_in) otherwise;
  // biases start at zero.
  static DenseNet mlp(int input_size, std::span<const int> hidden, int output_size,
                      Activation output_activation, Rng& rng);

  int input_size() const;
  int output_size() const;
  Eigen::Index parameter_count() const;
  std::span<const DenseLayer> layers() const { return layers_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Tape* tape = nullptr) const;

  // Reverse-mode pass. `input_grad`, when given, receives d loss / d input.
  Gradients backward(const Tape& tape, const Eigen::MatrixXd& output_grad,
                     Eigen::MatrixXd* input_grad = nullptr) const;

  // Flattened as, per layer, the weight (column-major) followed by the bias.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

  // In-place theta += delta for one layer; used by optimizers.
  DenseLayer& mutable_layer(std::size_t i) { return layers_[i]; }

  bool operator==(const DenseNet& other) const;

 private:
  std::vector<DenseLayer> layers_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// TensorFlow-style RMSProp: theta -= lr * g / sqrt(ms + epsilon).
struct RmsPropConfig {
  double learning_rate = 7e-4;
  double decay = 0.99;
  double epsilon = 1e-5;
};

using OptimizerConfig = std::variant<AdamConfig, RmsPropConfig>;

double learning_rate(const OptimizerConfig& config);

class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config) : config_(config) {}

  // Applies one update to every net from its matching gradient. The nets and
  // their shapes must be the same on every call.
  void step(std::span<DenseNet* const> nets, std::span<const Gradients> grads,
            double lr_scale = 1.0);

  long steps() const { return t_; }
  const OptimizerConfig& config() const { return config_; }

 private:
  OptimizerConfig config_;
  long t_ = 0;
  std::vector<Gradients> first_;
  std::vector<Gradients> second_;
};

// Rescales all gradients so their joint L2 norm is at most max_norm. Returns
// the norm before clipping.
double clip_global_norm(std::span<Gradients> grads, double max_norm);

struct GradCheckReport {
  double max_relative_error = 0.0;
  Eigen::Index worst_parameter = -1;
  int checked = 0;
  int skipped = 0;  // perturbation crossed a ReLU kink
  bool passed = false;
};

// Compares `analytic` with central differences of `loss` around `params`.
// Relative error is |a - n| / max(|a|, |n|, 1e-6). When `same_region` is
// given, parameters whose +/- perturbation leaves the current piecewise-
// linear region are skipped.
GradCheckReport check_gradients(const std::function<double(const Eigen::VectorXd&)>& loss,
                                const Eigen::VectorXd& params, const Eigen::VectorXd& analytic,
                                double tolerance, double step = 1e-5,
                                const std::function<bool(const Eigen::VectorXd&)>& same_region = {});

// loss(output, grad) returns the loss and writes d loss / d output.
using LossFn = std::function<double(const Eigen::MatrixXd& output, Eigen::MatrixXd* grad)>;

GradCheckReport grad_check(const DenseNet& net, const Eigen::MatrixXd& input, const LossFn& loss,
                           double tolerance, double step = 1e-5);

// Sign pattern of every ReLU pre-activation for a batch.
std::vector<bool> relu_pattern(const DenseNet& net, const Eigen::MatrixXd& input);

// Checkpoint layout:
//   {"layers": [{"activation": "relu"|"identity",
//                "weight": [[row 0], [row 1], ...],  // out x in
//                "bias": [...]}, ...]}
nlohmann::json to_json(const DenseNet& net);
DenseNet dense_net_from_json(const nlohmann::json& doc);

}  // namespace rgvf::nn

#endif  // RGVF_NN_H_
