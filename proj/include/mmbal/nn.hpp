// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mmbal/tensor.hpp"

namespace mmbal {

enum class Activation : std::uint8_t { kIdentity = 0, kRelu = 1 };

struct DenseLayer {
  Tensor2 weight;            // out x in
  std::vector<double> bias;  // out
  Activation activation = Activation::kIdentity;

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }
};

// Uniform init in [-sqrt(1/in_dim), +sqrt(1/in_dim)], bias zero.
DenseLayer make_dense_layer(std::size_t in_dim, std::size_t out_dim,
                            Activation act, std::uint64_t seed);

// activation(x * W^T + b), one output row per input row.
Tensor2 linear_forward(const Tensor2& x, const DenseLayer& layer);

// Single-sample path used by the training loop. Fills pre-activation and
// activated output.
void layer_forward(const DenseLayer& layer, std::span<const double> in,
                   std::vector<double>& preact, std::vector<double>& out);

// Reverse of layer_forward: given d(loss)/d(out), accumulates weight/bias
// gradients and writes d(loss)/d(in).
void layer_backward(const DenseLayer& layer, std::span<const double> in,
                    std::span<const double> preact, std::span<const double> dout,
                    Tensor2& dweight, std::vector<double>& dbias,
                    std::vector<double>& din);

// Max-shifted softmax; output sums to 1 within 1e-12.
std::vector<double> softmax(std::span<const double> logits);

// -log softmax(logits)[label], computed in log space.
double cross_entropy(std::span<const double> logits, std::size_t label);

// log(sum(exp(v))) with max shift.
double log_sum_exp(std::span<const double> v);

// d(cross_entropy)/d(logits) = softmax(logits) - onehot(label), scaled by
// `scale` and accumulated into `grad`.
void cross_entropy_backward(std::span<const double> scores, std::size_t label,
                            double scale, std::span<double> grad);

}  // namespace mmbal
