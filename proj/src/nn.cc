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

#include "rgvf/nn.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "rgvf/errors.h"

namespace rgvf::nn {

namespace {

void apply_activation(Activation a, Eigen::MatrixXd& z) {
  if (a == Activation::kRelu) z = z.cwiseMax(0.0);
}

// ReLU subgradient at exactly 0 is 0.
Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

}  // namespace

Gradients Gradients::zeros_like(const DenseNet& net) {
  Gradients g;
  for (const auto& layer : net.layers()) {
    g.weight.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return g;
}

void Gradients::add(const Gradients& other) {
  if (other.weight.size() != weight.size()) throw ShapeError("gradient layer counts differ");
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] += other.weight[i];
    bias[i] += other.bias[i];
  }
}

void Gradients::scale(double factor) {
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] *= factor;
    bias[i] *= factor;
  }
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    s += weight[i].squaredNorm() + bias[i].squaredNorm();
  }
  return s;
}

Eigen::VectorXd Gradients::flatten() const {
  Eigen::Index n = 0;
  for (std::size_t i = 0; i < weight.size(); ++i) n += weight[i].size() + bias[i].size();
  Eigen::VectorXd flat(n);
  Eigen::Index pos = 0;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    flat.segment(pos, weight[i].size()) = weight[i].reshaped();
    pos += weight[i].size();
    flat.segment(pos, bias[i].size()) = bias[i];
    pos += bias[i].size();
  }
  return flat;
}

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].bias.size() != layers_[i].weight.rows()) {
      throw ShapeError("layer " + std::to_string(i) + ": bias size differs from output width");
    }
    if (i > 0 && layers_[i].weight.cols() != layers_[i - 1].weight.rows()) {
      throw ShapeError("layer " + std::to_string(i) + ": input width does not chain");
    }
  }
}

DenseNet DenseNet::mlp(int input_size, std::span<const int> hidden, int output_size,
                       Activation output_activation, Rng& rng) {
  std::vector<int> widths{input_size};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(output_size);
  for (int w : widths) {
    if (w < 1) throw ConfigError("layer widths must be positive");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    DenseLayer layer;
    const bool last = i + 2 == widths.size();
    layer.activation = last ? output_activation : Activation::kRelu;
    const int fan_in = widths[i];
    const double bound =
        std::sqrt((layer.activation == Activation::kRelu ? 6.0 : 3.0) / fan_in);
    layer.weight.resize(widths[i + 1], fan_in);
    for (int r = 0; r < layer.weight.rows(); ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
    }
    layer.bias = Eigen::VectorXd::Zero(widths[i + 1]);
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

int DenseNet::input_size() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int DenseNet::output_size() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

Eigen::Index DenseNet::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

Eigen::MatrixXd DenseNet::forward(const Eigen::MatrixXd& input, Tape* tape) const {
  if (input.cols() != input_size()) {
    throw ShapeError("forward: input width " + std::to_string(input.cols()) + ", expected " +
                     std::to_string(input_size()));
  }
  if (tape) {
    tape->inputs.clear();
    tape->pre_activations.clear();
  }
  Eigen::MatrixXd x = input;
  for (const auto& layer : layers_) {
    Eigen::MatrixXd z(x.rows(), layer.weight.rows());
    z.noalias() = x * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    if (tape) {
      tape->inputs.push_back(std::move(x));
      tape->pre_activations.push_back(z);
    }
    apply_activation(layer.activation, z);
    x = std::move(z);
  }
  return x;
}

Gradients DenseNet::backward(const Tape& tape, const Eigen::MatrixXd& output_grad,
                             Eigen::MatrixXd* input_grad) const {
  if (tape.inputs.size() != layers_.size() || tape.pre_activations.size() != layers_.size()) {
    throw ShapeError("backward: tape does not match network");
  }
  if (layers_.empty()) {
    if (input_grad) *input_grad = output_grad;
    return {};
  }
  if (output_grad.cols() != output_size() ||
      output_grad.rows() != tape.pre_activations.back().rows()) {
    throw ShapeError("backward: output gradient shape does not match tape");
  }
  Gradients g;
  g.weight.resize(layers_.size());
  g.bias.resize(layers_.size());
  Eigen::MatrixXd delta = output_grad;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& layer = layers_[k];
    if (layer.activation == Activation::kRelu) {
      delta.array() *= relu_mask(tape.pre_activations[k]).array();
    }
    g.weight[k].noalias() = delta.transpose() * tape.inputs[k];
    g.bias[k] = delta.colwise().sum().transpose();
    if (k > 0 || input_grad) {
      Eigen::MatrixXd next(delta.rows(), layer.weight.cols());
      next.noalias() = delta * layer.weight;
      delta = std::move(next);
    }
  }
  if (input_grad) *input_grad = std::move(delta);
  return g;
}

Eigen::VectorXd DenseNet::parameters() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index pos = 0;
  for (const auto& l : layers_) {
    flat.segment(pos, l.weight.size()) = l.weight.reshaped();
    pos += l.weight.size();
    flat.segment(pos, l.bias.size()) = l.bias;
    pos += l.bias.size();
  }
  return flat;
}

void DenseNet::set_parameters(const Eigen::VectorXd& flat) {
  if (flat.size() != parameter_count()) throw ShapeError("set_parameters: size mismatch");
  Eigen::Index pos = 0;
  for (auto& l : layers_) {
    l.weight.reshaped() = flat.segment(pos, l.weight.size());
    pos += l.weight.size();
    l.bias = flat.segment(pos, l.bias.size());
    pos += l.bias.size();
  }
}

bool DenseNet::operator==(const DenseNet& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.activation != b.activation || a.weight.rows() != b.weight.rows() ||
        a.weight.cols() != b.weight.cols() || a.weight != b.weight || a.bias != b.bias) {
      return false;
    }
  }
  return true;
}

double learning_rate(const OptimizerConfig& config) {
  return std::visit([](const auto& c) { return c.learning_rate; }, config);
}

void Optimizer::step(std::span<DenseNet* const> nets, std::span<const Gradients> grads,
                     double lr_scale) {
  if (nets.size() != grads.size()) throw ShapeError("optimizer: nets and gradients differ");
  if (first_.empty()) {
    for (const DenseNet* net : nets) {
      first_.push_back(Gradients::zeros_like(*net));
      second_.push_back(Gradients::zeros_like(*net));
    }
  }
  if (first_.size() != nets.size()) throw ShapeError("optimizer: parameter set changed");
  ++t_;
  for (std::size_t n = 0; n < nets.size(); ++n) {
    DenseNet& net = *nets[n];
    const Gradients& g = grads[n];
    if (g.weight.size() != net.layers().size()) throw ShapeError("optimizer: layer count mismatch");
    for (std::size_t k = 0; k < g.weight.size(); ++k) {
      DenseLayer& layer = net.mutable_layer(k);
      if (g.weight[k].rows() != layer.weight.rows() || g.weight[k].cols() != layer.weight.cols() ||
          g.bias[k].size() != layer.bias.size()) {
        throw ShapeError("optimizer: gradient shape mismatch");
      }
      auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
        if (const auto* adam = std::get_if<AdamConfig>(&config_)) {
          const double lr = adam->learning_rate * lr_scale;
          const double c1 = 1.0 - std::pow(adam->beta1, static_cast<double>(t_));
          const double c2 = 1.0 - std::pow(adam->beta2, static_cast<double>(t_));
          m = adam->beta1 * m + (1.0 - adam->beta1) * grad;
          v = adam->beta2 * v + (1.0 - adam->beta2) * grad.cwiseProduct(grad);
          param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + adam->epsilon);
        } else {
          const auto& rms = std::get<RmsPropConfig>(config_);
          const double lr = rms.learning_rate * lr_scale;
          v = rms.decay * v + (1.0 - rms.decay) * grad.cwiseProduct(grad);
          param.array() -= lr * grad.array() / (v.array() + rms.epsilon).sqrt();
        }
      };
      update(layer.weight, g.weight[k], first_[n].weight[k], second_[n].weight[k]);
      update(layer.bias, g.bias[k], first_[n].bias[k], second_[n].bias[k]);
    }
  }
}

double clip_global_norm(std::span<Gradients> grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) sq += g.squared_norm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    for (auto& g : grads) g.scale(max_norm / norm);
  }
  return norm;
}

GradCheckReport check_gradients(const std::function<double(const Eigen::VectorXd&)>& loss,
                                const Eigen::VectorXd& params, const Eigen::VectorXd& analytic,
                                double tolerance, double step,
                                const std::function<bool(const Eigen::VectorXd&)>& same_region) {
  if (analytic.size() != params.size()) throw ShapeError("check_gradients: size mismatch");
  GradCheckReport report;
  Eigen::VectorXd probe = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    probe(i) = params(i) + step;
    const bool plus_ok = !same_region || same_region(probe);
    const double f_plus = loss(probe);
    probe(i) = params(i) - step;
    const bool minus_ok = !same_region || same_region(probe);
    const double f_minus = loss(probe);
    probe(i) = params(i);
    if (!plus_ok || !minus_ok) {
      ++report.skipped;
      continue;
    }
    const double numeric = (f_plus - f_minus) / (2.0 * step);
    const double denom = std::max({std::abs(analytic(i)), std::abs(numeric), 1e-6});
    const double rel = std::abs(analytic(i) - numeric) / denom;
    ++report.checked;
    if (rel > report.max_relative_error || !std::isfinite(rel)) {
      report.max_relative_error = rel;
      report.worst_parameter = i;
    }
  }
  report.passed = std::isfinite(report.max_relative_error) && report.max_relative_error < tolerance;
  return report;
}

std::vector<bool> relu_pattern(const DenseNet& net, const Eigen::MatrixXd& input) {
  Tape tape;
  net.forward(input, &tape);
  std::vector<bool> pattern;
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    if (net.layers()[k].activation != Activation::kRelu) continue;
    const auto& pre = tape.pre_activations[k];
    for (Eigen::Index i = 0; i < pre.size(); ++i) pattern.push_back(pre.data()[i] > 0.0);
  }
  return pattern;
}

GradCheckReport grad_check(const DenseNet& net, const Eigen::MatrixXd& input, const LossFn& loss,
                           double tolerance, double step) {
  Tape tape;
  const Eigen::MatrixXd out = net.forward(input, &tape);
  Eigen::MatrixXd out_grad;
  loss(out, &out_grad);
  const Eigen::VectorXd analytic = net.backward(tape, out_grad).flatten();
  const std::vector<bool> base_pattern = relu_pattern(net, input);

  DenseNet probe = net;
  auto eval = [&](const Eigen::VectorXd& theta) {
    probe.set_parameters(theta);
    return loss(probe.forward(input), nullptr);
  };
  auto same = [&](const Eigen::VectorXd& theta) {
    probe.set_parameters(theta);
    return relu_pattern(probe, input) == base_pattern;
  };
  return check_gradients(eval, net.parameters(), analytic, tolerance, step, same);
}

nlohmann::json to_json(const DenseNet& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    nlohmann::json weight = nlohmann::json::array();
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      weight.push_back(std::vector<double>(l.weight.row(r).begin(), l.weight.row(r).end()));
    }
    layers.push_back({{"activation", l.activation == Activation::kRelu ? "relu" : "identity"},
                      {"weight", std::move(weight)},
                      {"bias", std::vector<double>(l.bias.begin(), l.bias.end())}});
  }
  return {{"layers", std::move(layers)}};
}

DenseNet dense_net_from_json(const nlohmann::json& doc) {
  try {
    std::vector<DenseLayer> layers;
    for (const auto& lj : doc.at("layers")) {
      DenseLayer l;
      const std::string act = lj.at("activation").get<std::string>();
      if (act == "relu") {
        l.activation = Activation::kRelu;
      } else if (act == "identity") {
        l.activation = Activation::kIdentity;
      } else {
        throw ParseError("checkpoint: unknown activation \"" + act + "\"");
      }
      const auto& rows = lj.at("weight");
      const auto bias = lj.at("bias").get<std::vector<double>>();
      const Eigen::Index n_out = static_cast<Eigen::Index>(rows.size());
      const Eigen::Index n_in = n_out ? static_cast<Eigen::Index>(rows[0].size()) : 0;
      l.weight.resize(n_out, n_in);
      for (Eigen::Index r = 0; r < n_out; ++r) {
        const auto row = rows[r].get<std::vector<double>>();
        if (static_cast<Eigen::Index>(row.size()) != n_in) throw ParseError("checkpoint: ragged weight rows");
        for (Eigen::Index c = 0; c < n_in; ++c) l.weight(r, c) = row[c];
      }
      l.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
      layers.push_back(std::move(l));
    }
    return DenseNet(std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  } catch (const ShapeError& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace rgvf::nn
