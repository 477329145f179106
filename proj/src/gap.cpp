// SPDX-License-Identifier: Apache-2.0
#include "mmbal/gap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mmbal/errors.hpp"

namespace mmbal {

// One-hot softmax outputs are reachable at float precision; clamp before the
// log so 0 ln 0 resolves to 0.
static constexpr double kProbClamp = 1e-300;

double prob_gap(const ForwardRecord& record, std::size_t label) {
  if (label >= record.scores_a.size()) {
    throw IndexError("prob_gap: label " + std::to_string(label) +
                     " out of range");
  }
  return record.scores_a[label] - record.scores_v[label];
}

double kl_from_uniform(std::span<const double> scores) {
  const double m = static_cast<double>(scores.size());
  double kl = 0.0;
  for (double s : scores) {
    if (s > kProbClamp) kl += s * std::log(s * m);
  }
  return std::max(0.0, kl);
}

double kl_gap(const ForwardRecord& record) {
  return kl_from_uniform(record.scores_a) - kl_from_uniform(record.scores_v);
}

double gap_value(const ForwardRecord& record, std::size_t label,
                 GapMetricKind metric) {
  return metric == GapMetricKind::kProbGap ? prob_gap(record, label)
                                           : kl_gap(record);
}

// d s[y] / d l[k] = s[y] (delta_ky - s[k])
static void prob_score_backward(std::span<const double> scores,
                                std::size_t label, double upstream,
                                std::span<double> grad) {
  const double sy = scores[label];
  for (std::size_t k = 0; k < scores.size(); ++k) {
    grad[k] += upstream * sy * ((k == label ? 1.0 : 0.0) - scores[k]);
  }
}

// d KL(s||u) / d l[k] = s[k] (ln(s[k] M) - KL(s||u))
static void kl_score_backward(std::span<const double> scores, double upstream,
                              std::span<double> grad) {
  const double m = static_cast<double>(scores.size());
  const double kl = kl_from_uniform(scores);
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const double s = std::max(scores[k], kProbClamp);
    grad[k] += upstream * s * (std::log(s * m) - kl);
  }
}

void gap_backward(const ForwardRecord& record, std::size_t label,
                  GapMetricKind metric, double upstream,
                  std::span<double> grad_logits_a,
                  std::span<double> grad_logits_v) {
  if (metric == GapMetricKind::kProbGap) {
    prob_score_backward(record.scores_a, label, upstream, grad_logits_a);
    prob_score_backward(record.scores_v, label, -upstream, grad_logits_v);
  } else {
    kl_score_backward(record.scores_a, upstream, grad_logits_a);
    kl_score_backward(record.scores_v, -upstream, grad_logits_v);
  }
}

GapSet collect_gaps(const FusionModel& model, const Dataset& dataset,
                    std::span<const std::size_t> indices, GapMetricKind metric,
                    std::uint64_t snapshot_epoch) {
  GapSet set;
  set.metric = metric;
  set.snapshot_epoch = snapshot_epoch;
  set.gaps.reserve(indices.size());
  const double bound = metric == GapMetricKind::kProbGap
                           ? 1.0
                           : std::log(static_cast<double>(dataset.num_classes()));
  for (std::size_t idx : indices) {
    const auto& sample = dataset.samples[idx];
    const ForwardRecord rec = forward(model, sample);
    double g = gap_value(rec, sample.label, metric);
    g = std::clamp(g, -bound, bound);
    set.gaps.push_back(g);
  }
  return set;
}

GapSet collect_gaps(const FusionModel& model, const Dataset& dataset,
                    GapMetricKind metric, std::uint64_t snapshot_epoch) {
  std::vector<std::size_t> all(dataset.size());
  std::iota(all.begin(), all.end(), 0);
  return collect_gaps(model, dataset, all, metric, snapshot_epoch);
}

}  // namespace mmbal
