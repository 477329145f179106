// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mmbal/fusion.hpp"
#include "mmbal/synth.hpp"

namespace mmbal {

enum class GapMetricKind : std::uint8_t { kProbGap = 0, kKlGap = 1 };

// Per-sample modality gaps collected over a dataset snapshot, in dataset
// order. Sign convention: positive means modality a is the more confident
// one (correct-class probability for ProbGap, sharpness for KlGap).
struct GapSet {
  std::vector<double> gaps;
  GapMetricKind metric = GapMetricKind::kProbGap;
  std::uint64_t snapshot_epoch = 0;

  std::size_t size() const { return gaps.size(); }
};

// s_a[y] - s_v[y]; in [-1, 1].
double prob_gap(const ForwardRecord& record, std::size_t label);

// KL(s || uniform) = sum_j s_j ln(s_j M) = ln M - H(s), with 0 ln 0 := 0.
double kl_from_uniform(std::span<const double> scores);

// KL(s_a || u) - KL(s_v || u); label-free; in [-ln M, ln M].
double kl_gap(const ForwardRecord& record);

double gap_value(const ForwardRecord& record, std::size_t label,
                 GapMetricKind metric);

// d(gap)/d(l_a) and d(gap)/d(l_v) scaled by `upstream`, accumulated into the
// logit gradient buffers. These are the paths the adaptive penalties flow
// through.
void gap_backward(const ForwardRecord& record, std::size_t label,
                  GapMetricKind metric, double upstream,
                  std::span<double> grad_logits_a,
                  std::span<double> grad_logits_v);

// Full deterministic pass with the model frozen; output preserves the order
// of `indices` (dataset order when indices is the identity).
GapSet collect_gaps(const FusionModel& model, const Dataset& dataset,
                    std::span<const std::size_t> indices, GapMetricKind metric,
                    std::uint64_t snapshot_epoch);
GapSet collect_gaps(const FusionModel& model, const Dataset& dataset,
                    GapMetricKind metric, std::uint64_t snapshot_epoch = 0);

}  // namespace mmbal
