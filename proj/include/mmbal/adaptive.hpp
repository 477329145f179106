// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmbal/fusion.hpp"
#include "mmbal/gap.hpp"
#include "mmbal/mixture.hpp"

namespace mmbal {

struct AdaptiveConfig {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double anneal_base = 0.96;
  GapMetricKind gap_metric = GapMetricKind::kProbGap;
  MixtureFamily mixture_family = MixtureFamily::kGaussian;
  double student_nu = 4.0;
  bool disable_posterior_weights = false;  // ablation: w == 1
  bool disable_unimodal_losses = false;    // ablation: drop L_a, L_v

  void validate() const;  // throws ConfigError on negative alpha/beta/gamma
};

struct PerSampleLossTerms {
  double loss_mm = 0.0;  // CE(y, f(x))
  double loss_a = 0.0;   // CE(y, l_a)
  double loss_v = 0.0;   // CE(y, l_v)
  double gap = 0.0;
  double w0 = 1.0;
  double w1 = 0.0;
  double total = 0.0;
};

// Annealing coefficient anneal_base^epoch; epoch counts adaptive-stage
// epochs and continues across outer steps.
double lambda_t(std::size_t epoch, double anneal_base);

// Warm-up objective: CE(y, f(x)) + CE(y, l_a) + CE(y, l_v).
double warmup_loss(const ForwardRecord& record, std::size_t label);

// Upstream gradients on the three logit vectors, scaled by `scale` and
// accumulated. Feed the result to fusion backward().
struct LogitGrads {
  std::vector<double> fused;
  std::vector<double> logits_a;
  std::vector<double> logits_v;

  explicit LogitGrads(std::size_t num_classes)
      : fused(num_classes, 0.0), logits_a(num_classes, 0.0),
        logits_v(num_classes, 0.0) {}
  void zero();
};

double warmup_loss_with_grads(const ForwardRecord& record, std::size_t label,
                              double scale, LogitGrads& grads);

// total = alpha*w0*CE(y,f) + lambda*(beta*g^2 + gamma*w1*(g-mu0)^2
//         + CE(y,l_a) + CE(y,l_v)).
// Gradients flow through the CE terms and through g (hence through both
// softmax scores and encoders); w0, w1, mu0 and lambda are constants.
PerSampleLossTerms adaptive_loss(const ForwardRecord& record, std::size_t label,
                                 const Posterior& post, double mu0,
                                 const AdaptiveConfig& cfg, double lambda);

PerSampleLossTerms adaptive_loss_with_grads(const ForwardRecord& record,
                                            std::size_t label,
                                            const Posterior& post, double mu0,
                                            const AdaptiveConfig& cfg,
                                            double lambda, double scale,
                                            LogitGrads& grads);

// Sign of d(total)/d(gap) holding the CE terms fixed: the penalty pressure.
double penalty_gap_derivative(double gap, double w1, double mu0,
                              const AdaptiveConfig& cfg, double lambda);

struct BatchLossResult {
  double mean_total = 0.0;
  std::vector<PerSampleLossTerms> terms;
};

// Mean of per-sample totals; lambda computed once from `adaptive_epoch`.
BatchLossResult batch_adaptive_loss(std::span<const ForwardRecord> records,
                                    std::span<const std::size_t> labels,
                                    std::span<const Posterior> posteriors,
                                    const MixtureFit& fit,
                                    const AdaptiveConfig& cfg,
                                    std::size_t adaptive_epoch);

}  // namespace mmbal
