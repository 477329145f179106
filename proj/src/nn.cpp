// SPDX-License-Identifier: Apache-2.0
#include "mmbal/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmbal/errors.hpp"
#include "mmbal/rng.hpp"

namespace mmbal {

DenseLayer make_dense_layer(std::size_t in_dim, std::size_t out_dim,
                            Activation act, std::uint64_t seed) {
  DenseLayer layer;
  layer.weight = Tensor2(out_dim, in_dim);
  layer.bias.assign(out_dim, 0.0);
  layer.activation = act;
  const double bound = std::sqrt(1.0 / static_cast<double>(in_dim));
  auto rng = make_engine(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& w : layer.weight.data()) w = dist(rng);
  return layer;
}

static double apply_activation(Activation act, double x) {
  return act == Activation::kRelu ? std::max(0.0, x) : x;
}

Tensor2 linear_forward(const Tensor2& x, const DenseLayer& layer) {
  if (x.cols() != layer.in_dim()) {
    throw ShapeError("linear_forward: input cols " + std::to_string(x.cols()) +
                     " != layer in_dim " + std::to_string(layer.in_dim()));
  }
  Tensor2 out(x.rows(), layer.out_dim());
  std::vector<double> preact(layer.out_dim());
  std::vector<double> act(layer.out_dim());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    layer_forward(layer, x.row(r), preact, act);
    std::copy(act.begin(), act.end(), out.row(r).begin());
  }
  return out;
}

void layer_forward(const DenseLayer& layer, std::span<const double> in,
                   std::vector<double>& preact, std::vector<double>& out) {
  if (in.size() != layer.in_dim()) {
    throw ShapeError("layer_forward: input size " + std::to_string(in.size()) +
                     " != layer in_dim " + std::to_string(layer.in_dim()));
  }
  const std::size_t n_out = layer.out_dim();
  preact.resize(n_out);
  out.resize(n_out);
  for (std::size_t o = 0; o < n_out; ++o) {
    double acc = layer.bias[o];
    const auto w = layer.weight.row(o);
    for (std::size_t i = 0; i < in.size(); ++i) acc += w[i] * in[i];
    preact[o] = acc;
    out[o] = apply_activation(layer.activation, acc);
  }
}

void layer_backward(const DenseLayer& layer, std::span<const double> in,
                    std::span<const double> preact, std::span<const double> dout,
                    Tensor2& dweight, std::vector<double>& dbias,
                    std::vector<double>& din) {
  const std::size_t n_out = layer.out_dim();
  const std::size_t n_in = layer.in_dim();
  din.assign(n_in, 0.0);
  for (std::size_t o = 0; o < n_out; ++o) {
    double dpre = dout[o];
    if (layer.activation == Activation::kRelu && preact[o] <= 0.0) dpre = 0.0;
    if (dpre == 0.0) continue;
    dbias[o] += dpre;
    auto dw = dweight.row(o);
    const auto w = layer.weight.row(o);
    for (std::size_t i = 0; i < n_in; ++i) {
      dw[i] += dpre * in[i];
      din[i] += dpre * w[i];
    }
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.size() < 2) {
    throw ShapeError("softmax: need at least 2 classes, got " +
                     std::to_string(logits.size()));
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = std::exp(logits[j] - mx);
    sum += out[j];
  }
  for (double& v : out) v /= sum;
  return out;
}

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

double cross_entropy(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) {
    throw IndexError("cross_entropy: label " + std::to_string(label) +
                     " out of range for M=" + std::to_string(logits.size()));
  }
  return log_sum_exp(logits) - logits[label];
}

void cross_entropy_backward(std::span<const double> scores, std::size_t label,
                            double scale, std::span<double> grad) {
  for (std::size_t j = 0; j < scores.size(); ++j) {
    grad[j] += scale * (scores[j] - (j == label ? 1.0 : 0.0));
  }
}

}  // namespace mmbal
