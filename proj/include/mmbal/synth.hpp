// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mmbal {

enum class DegradeMode : std::uint8_t { kNoiseSwamp = 0, kLabelShuffleFeatures = 1 };

struct SynthConfig {
  std::size_t num_classes = 6;
  std::size_t num_samples = 3000;
  std::size_t feature_dim = 3;  // per modality
  double imbalance_fraction = 0.15;
  DegradeMode degrade_mode = DegradeMode::kNoiseSwamp;
  double noise_scale = 1.0;
  std::uint64_t seed = 1;
  // Degradation normally targets modality v, making a the dominant one; this
  // flag flips the degraded side to exercise the sign-agnostic mixture path.
  bool degrade_modality_a = false;

  void validate() const;
};

struct MultimodalSample {
  std::vector<double> x_a;
  std::vector<double> x_v;
  std::size_t label = 0;
  // Ground truth of the plant; hidden from training, exposed to tests.
  bool planted_imbalanced = false;
};

struct Dataset {
  SynthConfig config;  // generation config echo
  std::vector<MultimodalSample> samples;

  std::size_t size() const { return samples.size(); }
  std::size_t num_classes() const { return config.num_classes; }
  std::size_t feature_dim() const { return config.feature_dim; }
};

// Seeded synthetic two-modality classification data. Per class, a pair of
// modality centroids drawn from a unit Gaussian scaled by 3; clean samples
// are centroid + noise in both modalities; degraded samples keep the
// dominant modality clean and replace the other by class-free noise
// (NoiseSwamp) or another class's centroid plus noise (LabelShuffleFeatures).
Dataset generate(const SynthConfig& cfg);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Disjoint, exhaustive, class-stratified, seeded.
SplitIndices split(const Dataset& dataset, const SplitFractions& fractions,
                   std::uint64_t seed);

}  // namespace mmbal
