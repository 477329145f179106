// SPDX-License-Identifier: Apache-2.0
#include "mmbal/fusion.hpp"

#include <cmath>
#include <string>

#include "mmbal/errors.hpp"
#include "mmbal/rng.hpp"

namespace mmbal {

void EncoderConfig::validate() const {
  if (hidden_layers < 1) throw ConfigError("model.hidden_layers must be >= 1");
  if (hidden_width < 1) throw ConfigError("model.hidden_width must be >= 1");
}

FusionModel make_fusion_model(std::size_t num_classes, std::size_t feat_a,
                              std::size_t feat_v, const EncoderConfig& cfg,
                              std::uint64_t seed) {
  cfg.validate();
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
  FusionModel model;
  model.num_classes = num_classes;
  auto build_encoder = [&](std::size_t in_dim, const char* tag) {
    std::vector<DenseLayer> layers;
    std::size_t d = in_dim;
    for (std::size_t l = 0; l < cfg.hidden_layers; ++l) {
      layers.push_back(make_dense_layer(d, cfg.hidden_width, Activation::kRelu,
                                        derive_seed(seed, tag, l)));
      d = cfg.hidden_width;
    }
    return layers;
  };
  model.encoder_a = build_encoder(feat_a, "enc_a");
  model.encoder_v = build_encoder(feat_v, "enc_v");

  const auto head_a = make_dense_layer(cfg.hidden_width, num_classes,
                                       Activation::kIdentity,
                                       derive_seed(seed, "head_a"));
  const auto head_v = make_dense_layer(cfg.hidden_width, num_classes,
                                       Activation::kIdentity,
                                       derive_seed(seed, "head_v"));
  model.head_weight_a = head_a.weight;
  model.head_weight_v = head_v.weight;
  model.head_bias.assign(num_classes, 0.0);
  return model;
}

template <typename Model, typename Span>
static std::vector<Span> collect_views(Model& m) {
  std::vector<Span> views;
  for (auto& layer : m.encoder_a) {
    views.push_back(Span(layer.weight.data()));
    views.push_back(Span(layer.bias));
  }
  for (auto& layer : m.encoder_v) {
    views.push_back(Span(layer.weight.data()));
    views.push_back(Span(layer.bias));
  }
  views.push_back(Span(m.head_weight_a.data()));
  views.push_back(Span(m.head_weight_v.data()));
  views.push_back(Span(m.head_bias));
  return views;
}

std::vector<std::span<double>> FusionModel::parameter_views() {
  return collect_views<FusionModel, std::span<double>>(*this);
}

std::vector<std::span<const double>> FusionModel::parameter_views() const {
  return collect_views<const FusionModel, std::span<const double>>(*this);
}

static EncoderCache encoder_forward(const std::vector<DenseLayer>& encoder,
                                    std::span<const double> input) {
  EncoderCache cache;
  cache.layers.resize(encoder.size());
  std::vector<double> cur(input.begin(), input.end());
  for (std::size_t l = 0; l < encoder.size(); ++l) {
    auto& lc = cache.layers[l];
    lc.input = cur;
    layer_forward(encoder[l], lc.input, lc.preact, lc.output);
    cur = lc.output;
  }
  if (encoder.empty()) {
    // Encoder-less model: treat input as the embedding.
    cache.layers.resize(1);
    cache.layers[0].input.assign(input.begin(), input.end());
    cache.layers[0].output.assign(input.begin(), input.end());
  }
  return cache;
}

ForwardRecord forward(const FusionModel& model, std::span<const double> x_a,
                      std::span<const double> x_v) {
  if (x_a.size() != model.feature_dim_a() || x_v.size() != model.feature_dim_v()) {
    throw ShapeError("forward: feature dims (" + std::to_string(x_a.size()) +
                     ", " + std::to_string(x_v.size()) +
                     ") do not match encoders");
  }
  ForwardRecord rec;
  rec.cache_a = encoder_forward(model.encoder_a, x_a);
  rec.cache_v = encoder_forward(model.encoder_v, x_v);
  const auto phi_a = rec.cache_a.output();
  const auto phi_v = rec.cache_v.output();

  const std::size_t m = model.num_classes;
  rec.fused.assign(m, 0.0);
  rec.logits_a.assign(m, 0.0);
  rec.logits_v.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    double za = 0.0, zv = 0.0;
    const auto wa = model.head_weight_a.row(k);
    const auto wv = model.head_weight_v.row(k);
    for (std::size_t i = 0; i < phi_a.size(); ++i) za += wa[i] * phi_a[i];
    for (std::size_t i = 0; i < phi_v.size(); ++i) zv += wv[i] * phi_v[i];
    const double b = model.head_bias[k];
    rec.fused[k] = za + zv + b;
    rec.logits_a[k] = za + 0.5 * b;
    rec.logits_v[k] = zv + 0.5 * b;
  }
  rec.scores_a = softmax(rec.logits_a);
  rec.scores_v = softmax(rec.logits_v);
  if (!all_finite(rec.fused)) {
    throw NumericalError("forward: non-finite fused logits");
  }
  return rec;
}

ForwardRecord forward(const FusionModel& model, const MultimodalSample& sample) {
  return forward(model, sample.x_a, sample.x_v);
}

std::vector<ForwardRecord> batch_forward(const FusionModel& model,
                                         std::span<const MultimodalSample> batch) {
  std::vector<ForwardRecord> records;
  records.reserve(batch.size());
  for (const auto& sample : batch) records.push_back(forward(model, sample));
  return records;
}

FusionGradients make_gradients(const FusionModel& model) {
  FusionGradients g;
  auto mirror = [](const std::vector<DenseLayer>& src) {
    std::vector<DenseLayer> out;
    for (const auto& layer : src) {
      DenseLayer zero;
      zero.weight = Tensor2(layer.weight.rows(), layer.weight.cols());
      zero.bias.assign(layer.bias.size(), 0.0);
      zero.activation = layer.activation;
      out.push_back(std::move(zero));
    }
    return out;
  };
  g.encoder_a = mirror(model.encoder_a);
  g.encoder_v = mirror(model.encoder_v);
  g.head_weight_a = Tensor2(model.head_weight_a.rows(), model.head_weight_a.cols());
  g.head_weight_v = Tensor2(model.head_weight_v.rows(), model.head_weight_v.cols());
  g.head_bias.assign(model.head_bias.size(), 0.0);
  return g;
}

std::vector<std::span<double>> FusionGradients::views() {
  return collect_views<FusionGradients, std::span<double>>(*this);
}

std::vector<std::span<const double>> FusionGradients::views() const {
  return collect_views<const FusionGradients, std::span<const double>>(*this);
}

void FusionGradients::zero() {
  for (auto v : views()) {
    for (double& x : v) x = 0.0;
  }
}

void FusionGradients::scale(double s) {
  for (auto v : views()) {
    for (double& x : v) x *= s;
  }
}

double FusionGradients::global_norm() const {
  double sq = 0.0;
  for (auto v : views()) {
    for (double x : v) sq += x * x;
  }
  return std::sqrt(sq);
}

static void encoder_backward(const std::vector<DenseLayer>& encoder,
                             const EncoderCache& cache,
                             std::span<const double> dout,
                             std::vector<DenseLayer>& grads) {
  if (encoder.empty()) return;
  std::vector<double> cur(dout.begin(), dout.end());
  std::vector<double> din;
  for (std::size_t l = encoder.size(); l-- > 0;) {
    const auto& lc = cache.layers[l];
    layer_backward(encoder[l], lc.input, lc.preact, cur, grads[l].weight,
                   grads[l].bias, din);
    cur = din;
  }
}

void backward(const FusionModel& model, const ForwardRecord& record,
              std::span<const double> grad_fused,
              std::span<const double> grad_logits_a,
              std::span<const double> grad_logits_v, FusionGradients& grads) {
  const std::size_t m = model.num_classes;
  const auto phi_a = record.cache_a.output();
  const auto phi_v = record.cache_v.output();
  std::vector<double> dphi_a(phi_a.size(), 0.0);
  std::vector<double> dphi_v(phi_v.size(), 0.0);

  for (std::size_t k = 0; k < m; ++k) {
    const double ga = grad_fused[k] + grad_logits_a[k];
    const double gv = grad_fused[k] + grad_logits_v[k];
    grads.head_bias[k] +=
        grad_fused[k] + 0.5 * (grad_logits_a[k] + grad_logits_v[k]);
    auto dwa = grads.head_weight_a.row(k);
    auto dwv = grads.head_weight_v.row(k);
    const auto wa = model.head_weight_a.row(k);
    const auto wv = model.head_weight_v.row(k);
    for (std::size_t i = 0; i < phi_a.size(); ++i) {
      dwa[i] += ga * phi_a[i];
      dphi_a[i] += ga * wa[i];
    }
    for (std::size_t i = 0; i < phi_v.size(); ++i) {
      dwv[i] += gv * phi_v[i];
      dphi_v[i] += gv * wv[i];
    }
  }
  encoder_backward(model.encoder_a, record.cache_a, dphi_a, grads.encoder_a);
  encoder_backward(model.encoder_v, record.cache_v, dphi_v, grads.encoder_v);
}

}  // namespace mmbal
