// Copyright 2026 The CLOT Authors.
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

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "clot/core.hpp"
#include "clot/geometry.hpp"
#include "clot/rng.hpp"

namespace clot {

/// Kinematic state of one control step as seen by the style discriminator.
struct AmpFrameState {
  VecX dof_pos;
  VecX dof_vel;
  double root_height = 0.0;
  Vec3 projected_gravity = Vec3::Zero();
  Vec3 root_lin_vel = Vec3::Zero();
  Vec3 root_ang_vel = Vec3::Zero();
};

inline long amp_feature_size(int n_joints) { return 2L * (2L * n_joints + 10L); }

/// Discriminator input: two consecutive frames flattened back to back, each
/// as (q, qd, root height, projected gravity, root lin vel, root ang vel).
inline VecX amp_feature(const AmpFrameState& prev, const AmpFrameState& curr) {
  const auto n = prev.dof_pos.size();
  require(n > 0, "amp_feature: empty joint state");
  require(prev.dof_vel.size() == n && curr.dof_pos.size() == n && curr.dof_vel.size() == n,
          "amp_feature: frame dimension mismatch");
  VecX out(amp_feature_size(static_cast<int>(n)));
  long cursor = 0;
  for (const AmpFrameState* frame : {&prev, &curr}) {
    out.segment(cursor, n) = frame->dof_pos;
    cursor += n;
    out.segment(cursor, n) = frame->dof_vel;
    cursor += n;
    out[cursor++] = frame->root_height;
    out.segment<3>(cursor) = frame->projected_gravity;
    cursor += 3;
    out.segment<3>(cursor) = frame->root_lin_vel;
    cursor += 3;
    out.segment<3>(cursor) = frame->root_ang_vel;
    cursor += 3;
  }
  require(cursor == out.size(), "amp_feature: layout mismatch");
  return out;
}

struct AmpConfig {
  double lambda_style = 0.5;
  double lambda_task = 0.5;
  double epsilon = 1e-4;     // output clamp, bounds log D
  double learning_rate = 1e-3;
  int hidden_layers = 2;     // desk-scale default; 4 x 1024 at full scale
  int hidden_width = 64;
};

inline void validate_amp_config(const AmpConfig& c) {
  require(c.lambda_style >= 0.0 && c.lambda_task >= 0.0, "amp config: lambdas must be >= 0");
  require(c.lambda_style + c.lambda_task > 0.0, "amp config: lambda_style + lambda_task must be > 0");
  require(c.epsilon > 0.0 && c.epsilon < 0.5, "amp config: epsilon must lie in (0, 0.5)");
  require(c.learning_rate >= 0.0, "amp config: learning rate must be >= 0");
  require(c.hidden_layers >= 1 && c.hidden_width >= 1, "amp config: net must have at least one hidden unit");
}

/// One hidden block: affine map, layer normalization, rectified-linear.
struct DenseLayer {
  MatX weight;
  VecX bias;
  VecX gain;   // layer-norm scale
  VecX shift;  // layer-norm offset
};

inline constexpr double kLayerNormEps = 1e-5;

struct DiscriminatorNet {
  std::vector<DenseLayer> hidden;
  VecX out_weight;
  double out_bias = 0.0;
  double epsilon = 1e-4;
  int input_dim = 0;
};

inline DiscriminatorNet make_discriminator(int input_dim, const AmpConfig& config, Rng& rng) {
  validate_amp_config(config);
  require(input_dim > 0, "make_discriminator: input_dim must be positive");
  DiscriminatorNet net;
  net.input_dim = input_dim;
  net.epsilon = config.epsilon;
  int fan_in = input_dim;
  for (int l = 0; l < config.hidden_layers; ++l) {
    DenseLayer layer;
    layer.weight.resize(config.hidden_width, fan_in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        layer.weight(r, c) = rng.uniform(-scale, scale);
    layer.bias = VecX::Zero(config.hidden_width);
    layer.gain = VecX::Ones(config.hidden_width);
    layer.shift = VecX::Zero(config.hidden_width);
    net.hidden.push_back(std::move(layer));
    fan_in = config.hidden_width;
  }
  net.out_weight.resize(fan_in);
  const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index i = 0; i < net.out_weight.size(); ++i) net.out_weight[i] = rng.uniform(-scale, scale);
  net.out_bias = 0.0;
  return net;
}

namespace detail {

struct LayerCache {
  VecX input;
  VecX normalized;  // (z - mean) / std
  double inv_std = 0.0;
  VecX pre_act;     // gain .* normalized + shift
  VecX output;      // relu(pre_act)
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  VecX last_hidden;
  double logit = 0.0;
  double d_raw = 0.0;  // sigmoid(logit), before clamping
  double d = 0.0;      // clamped
};

inline ForwardCache forward_cached(const DiscriminatorNet& net, const VecX& x) {
  require(x.size() == net.input_dim, "discriminator: feature length " + std::to_string(x.size()) +
                                         " does not match input dim " + std::to_string(net.input_dim));
  ForwardCache cache;
  VecX h = x;
  for (const auto& layer : net.hidden) {
    LayerCache lc;
    lc.input = h;
    const VecX z = layer.weight * h + layer.bias;
    const double mean = z.mean();
    const double var = (z.array() - mean).square().mean();
    lc.inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
    lc.normalized = (z.array() - mean).matrix() * lc.inv_std;
    lc.pre_act = layer.gain.cwiseProduct(lc.normalized) + layer.shift;
    lc.output = lc.pre_act.cwiseMax(0.0);
    h = lc.output;
    cache.layers.push_back(std::move(lc));
  }
  cache.last_hidden = h;
  cache.logit = net.out_weight.dot(h) + net.out_bias;
  cache.d_raw = 1.0 / (1.0 + std::exp(-cache.logit));
  cache.d = std::clamp(cache.d_raw, net.epsilon, 1.0 - net.epsilon);
  return cache;
}

}  // namespace detail

/// Deterministic forward pass; output clamped to [epsilon, 1 - epsilon].
inline double disc_forward(const DiscriminatorNet& net, const VecX& feature) {
  return detail::forward_cached(net, feature).d;
}

/// Gradient container with the same shapes as the net parameters.
struct DiscriminatorGrad {
  std::vector<DenseLayer> hidden;
  VecX out_weight;
  double out_bias = 0.0;
};

inline DiscriminatorGrad zero_grad(const DiscriminatorNet& net) {
  DiscriminatorGrad g;
  for (const auto& layer : net.hidden) {
    DenseLayer zl;
    zl.weight = MatX::Zero(layer.weight.rows(), layer.weight.cols());
    zl.bias = VecX::Zero(layer.bias.size());
    zl.gain = VecX::Zero(layer.gain.size());
    zl.shift = VecX::Zero(layer.shift.size());
    g.hidden.push_back(std::move(zl));
  }
  g.out_weight = VecX::Zero(net.out_weight.size());
  g.out_bias = 0.0;
  return g;
}

inline long param_count(const DiscriminatorNet& net) {
  long count = 0;
  for (const auto& layer : net.hidden)
    count += layer.weight.size() + layer.bias.size() + layer.gain.size() + layer.shift.size();
  return count + net.out_weight.size() + 1;
}

inline VecX flatten_params(const DiscriminatorNet& net) {
  VecX out(param_count(net));
  long cursor = 0;
  for (const auto& layer : net.hidden) {
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) out[cursor++] = layer.weight(r, c);
    out.segment(cursor, layer.bias.size()) = layer.bias;
    cursor += layer.bias.size();
    out.segment(cursor, layer.gain.size()) = layer.gain;
    cursor += layer.gain.size();
    out.segment(cursor, layer.shift.size()) = layer.shift;
    cursor += layer.shift.size();
  }
  out.segment(cursor, net.out_weight.size()) = net.out_weight;
  cursor += net.out_weight.size();
  out[cursor++] = net.out_bias;
  require(cursor == out.size(), "flatten_params: layout mismatch");
  return out;
}

inline void set_flat_params(DiscriminatorNet& net, const VecX& params) {
  require(params.size() == param_count(net), "set_flat_params: size mismatch");
  long cursor = 0;
  for (auto& layer : net.hidden) {
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = params[cursor++];
    layer.bias = params.segment(cursor, layer.bias.size());
    cursor += layer.bias.size();
    layer.gain = params.segment(cursor, layer.gain.size());
    cursor += layer.gain.size();
    layer.shift = params.segment(cursor, layer.shift.size());
    cursor += layer.shift.size();
  }
  net.out_weight = params.segment(cursor, net.out_weight.size());
  cursor += net.out_weight.size();
  net.out_bias = params[cursor++];
}

inline VecX flatten_grad(const DiscriminatorGrad& grad) {
  long count = 0;
  for (const auto& layer : grad.hidden)
    count += layer.weight.size() + layer.bias.size() + layer.gain.size() + layer.shift.size();
  count += grad.out_weight.size() + 1;
  VecX out(count);
  long cursor = 0;
  for (const auto& layer : grad.hidden) {
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) out[cursor++] = layer.weight(r, c);
    out.segment(cursor, layer.bias.size()) = layer.bias;
    cursor += layer.bias.size();
    out.segment(cursor, layer.gain.size()) = layer.gain;
    cursor += layer.gain.size();
    out.segment(cursor, layer.shift.size()) = layer.shift;
    cursor += layer.shift.size();
  }
  out.segment(cursor, grad.out_weight.size()) = grad.out_weight;
  cursor += grad.out_weight.size();
  out[cursor++] = grad.out_bias;
  return out;
}

namespace detail {

/// Accumulates d(loss)/d(params) for one sample given d(loss)/d(logit).
/// Samples whose raw output sits in the clamped region contribute nothing.
inline void backward_sample(const DiscriminatorNet& net, const ForwardCache& cache,
                            double dloss_dlogit, DiscriminatorGrad& grad) {
  if (cache.d_raw <= net.epsilon || cache.d_raw >= 1.0 - net.epsilon) return;
  grad.out_weight += dloss_dlogit * cache.last_hidden;
  grad.out_bias += dloss_dlogit;
  VecX dh = dloss_dlogit * net.out_weight;
  for (long l = static_cast<long>(net.hidden.size()) - 1; l >= 0; --l) {
    const auto& layer = net.hidden[static_cast<size_t>(l)];
    const auto& lc = cache.layers[static_cast<size_t>(l)];
    auto& gl = grad.hidden[static_cast<size_t>(l)];
    const VecX d_pre = (lc.pre_act.array() > 0.0).select(dh, VecX::Zero(dh.size()));
    gl.gain += d_pre.cwiseProduct(lc.normalized);
    gl.shift += d_pre;
    const VecX gz = d_pre.cwiseProduct(layer.gain);
    const double mean_gz = gz.mean();
    const double mean_gz_zhat = gz.cwiseProduct(lc.normalized).mean();
    const VecX dz = lc.inv_std * (gz.array() - mean_gz - lc.normalized.array() * mean_gz_zhat).matrix();
    gl.weight += dz * lc.input.transpose();
    gl.bias += dz;
    dh = layer.weight.transpose() * dz;
  }
}

}  // namespace detail

struct DiscLossResult {
  double loss = 0.0;         // L_D = E_real[log D] + E_fake[log(1 - D)]
  DiscriminatorGrad grad;    // gradient of -L_D, ready for descent
};

/// Loss of the real/fake batches with the gradient of its negation, so a
/// plain descent step ascends L_D.
inline DiscLossResult disc_loss(const DiscriminatorNet& net, const std::vector<VecX>& real_batch,
                                const std::vector<VecX>& fake_batch) {
  require(!real_batch.empty() && !fake_batch.empty(), "disc_loss: batches must be non-empty");
  DiscLossResult result;
  result.grad = zero_grad(net);
  const double inv_real = 1.0 / static_cast<double>(real_batch.size());
  const double inv_fake = 1.0 / static_cast<double>(fake_batch.size());
  for (const VecX& x : real_batch) {
    const auto cache = detail::forward_cached(net, x);
    result.loss += inv_real * std::log(cache.d);
    // d(-log D)/dlogit = sigmoid(logit) - 1 in the unclamped region.
    detail::backward_sample(net, cache, inv_real * (cache.d_raw - 1.0), result.grad);
  }
  for (const VecX& x : fake_batch) {
    const auto cache = detail::forward_cached(net, x);
    result.loss += inv_fake * std::log(1.0 - cache.d);
    // d(-log(1 - D))/dlogit = sigmoid(logit).
    detail::backward_sample(net, cache, inv_fake * cache.d_raw, result.grad);
  }
  return result;
}

/// Style reward; bounded in [log eps, log(1 - eps)] by the output clamp.
inline double amp_reward(const DiscriminatorNet& net, const VecX& feature) {
  return std::log(disc_forward(net, feature));
}

inline double combine_reward(double r_amp, double r_task, const AmpConfig& config) {
  validate_amp_config(config);
  require(std::isfinite(r_amp) && std::isfinite(r_task), "combine_reward: non-finite input");
  return config.lambda_style * r_amp + config.lambda_task * r_task;
}

/// One full-batch SGD step ascending L_D. Returns the pre-step loss.
inline double train_step(DiscriminatorNet& net, const std::vector<VecX>& real_batch,
                         const std::vector<VecX>& fake_batch, double lr) {
  require(lr >= 0.0, "train_step: learning rate must be >= 0");
  const DiscLossResult result = disc_loss(net, real_batch, fake_batch);
  if (lr == 0.0) return result.loss;
  for (size_t l = 0; l < net.hidden.size(); ++l) {
    net.hidden[l].weight -= lr * result.grad.hidden[l].weight;
    net.hidden[l].bias -= lr * result.grad.hidden[l].bias;
    net.hidden[l].gain -= lr * result.grad.hidden[l].gain;
    net.hidden[l].shift -= lr * result.grad.hidden[l].shift;
  }
  net.out_weight -= lr * result.grad.out_weight;
  net.out_bias -= lr * result.grad.out_bias;
  return result.loss;
}

inline nlohmann::json net_to_json(const DiscriminatorNet& net) {
  nlohmann::json tensors = nlohmann::json::array();
  auto add = [&](const std::string& name, const std::vector<long>& shape, const double* data, long size) {
    nlohmann::json t{{"name", name}, {"shape", shape}};
    nlohmann::json values = nlohmann::json::array();
    for (long i = 0; i < size; ++i) values.push_back(data[i]);
    t["data"] = std::move(values);
    tensors.push_back(std::move(t));
  };
  for (size_t l = 0; l < net.hidden.size(); ++l) {
    const auto& layer = net.hidden[l];
    const std::string prefix = "hidden" + std::to_string(l) + ".";
    // Eigen matrices are column-major; serialize in storage order.
    add(prefix + "weight", {layer.weight.rows(), layer.weight.cols()}, layer.weight.data(),
        layer.weight.size());
    add(prefix + "bias", {layer.bias.size()}, layer.bias.data(), layer.bias.size());
    add(prefix + "gain", {layer.gain.size()}, layer.gain.data(), layer.gain.size());
    add(prefix + "shift", {layer.shift.size()}, layer.shift.data(), layer.shift.size());
  }
  add("out.weight", {net.out_weight.size()}, net.out_weight.data(), net.out_weight.size());
  add("out.bias", {1}, &net.out_bias, 1);
  return nlohmann::json{{"input_dim", net.input_dim}, {"epsilon", net.epsilon}, {"tensors", tensors}};
}

inline DiscriminatorNet net_from_json(const nlohmann::json& doc) {
  DiscriminatorNet net;
  net.input_dim = doc.at("input_dim").get<int>();
  net.epsilon = doc.at("epsilon").get<double>();
  require(net.input_dim > 0, "net_from_json: input_dim must be positive");
  require(net.epsilon > 0.0 && net.epsilon < 0.5, "net_from_json: epsilon must lie in (0, 0.5)");
  const auto& tensors = doc.at("tensors");
  require(tensors.is_array(), "net_from_json: 'tensors' must be an array");
  auto read_vec = [](const nlohmann::json& t) {
    const auto& data = t.at("data");
    VecX v(data.size());
    for (size_t i = 0; i < data.size(); ++i) v[static_cast<Eigen::Index>(i)] = data[i].get<double>();
    return v;
  };
  size_t i = 0;
  while (i < tensors.size() && tensors[i].at("name").get<std::string>().rfind("hidden", 0) == 0) {
    DenseLayer layer;
    const auto& wt = tensors[i];
    const auto shape = wt.at("shape");
    require(shape.size() == 2, "net_from_json: weight tensor must be 2-d");
    const long rows = shape[0].get<long>();
    const long cols = shape[1].get<long>();
    const VecX flat = read_vec(wt);
    require(flat.size() == rows * cols, "net_from_json: weight size mismatch");
    layer.weight = Eigen::Map<const MatX>(flat.data(), rows, cols);
    layer.bias = read_vec(tensors.at(i + 1));
    layer.gain = read_vec(tensors.at(i + 2));
    layer.shift = read_vec(tensors.at(i + 3));
    require(layer.bias.size() == rows && layer.gain.size() == rows && layer.shift.size() == rows,
            "net_from_json: hidden layer shape mismatch");
    net.hidden.push_back(std::move(layer));
    i += 4;
  }
  require(i + 2 == tensors.size(), "net_from_json: unexpected tensor count");
  net.out_weight = read_vec(tensors.at(i));
  const VecX bias = read_vec(tensors.at(i + 1));
  require(bias.size() == 1, "net_from_json: output bias must be scalar");
  net.out_bias = bias[0];
  require(!net.hidden.empty(), "net_from_json: no hidden layers");
  require(net.hidden.front().weight.cols() == net.input_dim, "net_from_json: input dim mismatch");
  require(net.out_weight.size() == net.hidden.back().weight.rows(),
          "net_from_json: output layer shape mismatch");
  return net;
}

}  // namespace clot
