// SPDX-License-Identifier: Apache-2.0
#include "mmbal/adaptive.hpp"

#include <cmath>
#include <string>

#include "mmbal/errors.hpp"

namespace mmbal {

void AdaptiveConfig::validate() const {
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0) {
    throw ConfigError("adaptive: alpha, beta, gamma must be nonnegative");
  }
  if (!(anneal_base > 0.0) || anneal_base > 1.0) {
    throw ConfigError("adaptive.anneal_base must be in (0, 1]");
  }
  if (!(student_nu > 2.0)) {
    throw ConfigError("adaptive.student_nu must be > 2");
  }
}

double lambda_t(std::size_t epoch, double anneal_base) {
  return std::pow(anneal_base, static_cast<double>(epoch));
}

double warmup_loss(const ForwardRecord& record, std::size_t label) {
  return cross_entropy(record.fused, label) +
         cross_entropy(record.logits_a, label) +
         cross_entropy(record.logits_v, label);
}

void LogitGrads::zero() {
  fused.assign(fused.size(), 0.0);
  logits_a.assign(logits_a.size(), 0.0);
  logits_v.assign(logits_v.size(), 0.0);
}

double warmup_loss_with_grads(const ForwardRecord& record, std::size_t label,
                              double scale, LogitGrads& grads) {
  const double loss = warmup_loss(record, label);
  const std::vector<double> scores_f = softmax(record.fused);
  cross_entropy_backward(scores_f, label, scale, grads.fused);
  cross_entropy_backward(record.scores_a, label, scale, grads.logits_a);
  cross_entropy_backward(record.scores_v, label, scale, grads.logits_v);
  return loss;
}

static PerSampleLossTerms compose_terms(const ForwardRecord& record,
                                        std::size_t label,
                                        const Posterior& post, double mu0,
                                        const AdaptiveConfig& cfg,
                                        double lambda) {
  PerSampleLossTerms t;
  t.loss_mm = cross_entropy(record.fused, label);
  t.loss_a = cross_entropy(record.logits_a, label);
  t.loss_v = cross_entropy(record.logits_v, label);
  t.gap = gap_value(record, label, cfg.gap_metric);
  t.w0 = cfg.disable_posterior_weights ? 1.0 : post.w0;
  t.w1 = cfg.disable_posterior_weights ? 1.0 : post.w1;
  const double dev = t.gap - mu0;
  double penalty_block = cfg.beta * t.gap * t.gap + cfg.gamma * t.w1 * dev * dev;
  if (!cfg.disable_unimodal_losses) penalty_block += t.loss_a + t.loss_v;
  t.total = cfg.alpha * t.w0 * t.loss_mm + lambda * penalty_block;
  return t;
}

PerSampleLossTerms adaptive_loss(const ForwardRecord& record, std::size_t label,
                                 const Posterior& post, double mu0,
                                 const AdaptiveConfig& cfg, double lambda) {
  return compose_terms(record, label, post, mu0, cfg, lambda);
}

double penalty_gap_derivative(double gap, double w1, double mu0,
                              const AdaptiveConfig& cfg, double lambda) {
  return 2.0 * lambda * (cfg.beta * gap + cfg.gamma * w1 * (gap - mu0));
}

PerSampleLossTerms adaptive_loss_with_grads(const ForwardRecord& record,
                                            std::size_t label,
                                            const Posterior& post, double mu0,
                                            const AdaptiveConfig& cfg,
                                            double lambda, double scale,
                                            LogitGrads& grads) {
  const PerSampleLossTerms t = compose_terms(record, label, post, mu0, cfg, lambda);

  // Fused CE path, weighted by the (constant) balanced posterior.
  const std::vector<double> scores_f = softmax(record.fused);
  cross_entropy_backward(scores_f, label, scale * cfg.alpha * t.w0, grads.fused);

  // Unimodal CE paths, annealed.
  if (!cfg.disable_unimodal_losses) {
    cross_entropy_backward(record.scores_a, label, scale * lambda, grads.logits_a);
    cross_entropy_backward(record.scores_v, label, scale * lambda, grads.logits_v);
  }

  // Gap penalty path through both softmax scores; w1 and mu0 are constants.
  const double dpen = penalty_gap_derivative(t.gap, t.w1, mu0, cfg, lambda);
  if (dpen != 0.0) {
    gap_backward(record, label, cfg.gap_metric, scale * dpen, grads.logits_a,
                 grads.logits_v);
  }
  return t;
}

BatchLossResult batch_adaptive_loss(std::span<const ForwardRecord> records,
                                    std::span<const std::size_t> labels,
                                    std::span<const Posterior> posteriors,
                                    const MixtureFit& fit,
                                    const AdaptiveConfig& cfg,
                                    std::size_t adaptive_epoch) {
  if (records.size() != labels.size() || records.size() != posteriors.size()) {
    throw ShapeError("batch_adaptive_loss: records/labels/posteriors lengths "
                     "differ");
  }
  const double lambda = lambda_t(adaptive_epoch, cfg.anneal_base);
  BatchLossResult result;
  result.terms.reserve(records.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    result.terms.push_back(adaptive_loss(records[i], labels[i], posteriors[i],
                                         fit.mu0, cfg, lambda));
    sum += result.terms.back().total;
  }
  result.mean_total = records.empty() ? 0.0 : sum / static_cast<double>(records.size());
  return result;
}

}  // namespace mmbal
