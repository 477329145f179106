// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mmbal/nn.hpp"
#include "mmbal/synth.hpp"
#include "mmbal/tensor.hpp"

namespace mmbal {

struct EncoderConfig {
  std::size_t hidden_layers = 2;
  std::size_t hidden_width = 32;

  void validate() const;
};

// Two-encoder concatenation-fusion classifier. The head weight is stored
// pre-partitioned per modality so the additive logit decomposition
// f(x) = l_a + l_v is structural rather than a slicing convention.
struct FusionModel {
  std::vector<DenseLayer> encoder_a;
  std::vector<DenseLayer> encoder_v;
  Tensor2 head_weight_a;          // M x d_a
  Tensor2 head_weight_v;          // M x d_v
  std::vector<double> head_bias;  // M
  std::size_t num_classes = 0;

  std::size_t feature_dim_a() const {
    return encoder_a.empty() ? head_weight_a.cols() : encoder_a.front().in_dim();
  }
  std::size_t feature_dim_v() const {
    return encoder_v.empty() ? head_weight_v.cols() : encoder_v.front().in_dim();
  }
  std::size_t embed_dim_a() const { return head_weight_a.cols(); }
  std::size_t embed_dim_v() const { return head_weight_v.cols(); }

  // Fixed serialization order: enc_a layers (W, b), enc_v layers (W, b),
  // head W^a, head W^v, head bias.
  std::vector<std::span<double>> parameter_views();
  std::vector<std::span<const double>> parameter_views() const;

  bool operator==(const FusionModel& other) const = default;
};

FusionModel make_fusion_model(std::size_t num_classes, std::size_t feat_a,
                              std::size_t feat_v, const EncoderConfig& cfg,
                              std::uint64_t seed);

struct LayerCache {
  std::vector<double> input;
  std::vector<double> preact;
  std::vector<double> output;
};

struct EncoderCache {
  std::vector<LayerCache> layers;
  std::span<const double> output() const { return layers.back().output; }
};

struct ForwardRecord {
  std::vector<double> fused;     // f(x), length M
  std::vector<double> logits_a;  // l_a = W^a phi_a + b/2
  std::vector<double> logits_v;  // l_v = W^v phi_v + b/2
  std::vector<double> scores_a;  // softmax(l_a)
  std::vector<double> scores_v;  // softmax(l_v)
  EncoderCache cache_a;
  EncoderCache cache_v;
};

ForwardRecord forward(const FusionModel& model, std::span<const double> x_a,
                      std::span<const double> x_v);
ForwardRecord forward(const FusionModel& model, const MultimodalSample& sample);

std::vector<ForwardRecord> batch_forward(const FusionModel& model,
                                         std::span<const MultimodalSample> batch);

// Gradient buffers mirroring FusionModel parameters.
struct FusionGradients {
  std::vector<DenseLayer> encoder_a;  // weight/bias reused as grad storage
  std::vector<DenseLayer> encoder_v;
  Tensor2 head_weight_a;
  Tensor2 head_weight_v;
  std::vector<double> head_bias;

  std::vector<std::span<double>> views();
  std::vector<std::span<const double>> views() const;
  void zero();
  void scale(double s);
  double global_norm() const;
};

FusionGradients make_gradients(const FusionModel& model);

// Accumulates parameter gradients for one sample given upstream gradients on
// the fused and unimodal logits. Bias split b/2 per branch means the head
// bias receives grad_fused + (grad_la + grad_lv)/2.
void backward(const FusionModel& model, const ForwardRecord& record,
              std::span<const double> grad_fused,
              std::span<const double> grad_logits_a,
              std::span<const double> grad_logits_v, FusionGradients& grads);

}  // namespace mmbal
