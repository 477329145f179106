// SPDX-License-Identifier: Apache-2.0
#include "mmbal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mmbal/errors.hpp"
#include "mmbal/rng.hpp"

namespace mmbal {

namespace {

// Class centroids are drawn at 3x unit scale so that unit feature noise
// leaves class structure learnable but not trivial.
constexpr double kCentroidScale = 3.0;

std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t dim,
                                    double scale) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(dim);
  for (double& x : v) x = scale * dist(rng);
  return v;
}

}  // namespace

void SynthConfig::validate() const {
  if (num_classes < 2) throw ConfigError("data.num_classes must be >= 2");
  if (num_samples < 1) throw ConfigError("data.num_samples must be >= 1");
  if (feature_dim < 2) throw ConfigError("data.feature_dim must be >= 2");
  if (imbalance_fraction < 0.0 || imbalance_fraction > 1.0) {
    throw ConfigError("data.imbalance_fraction must be in [0, 1]");
  }
  if (!(noise_scale > 0.0)) throw ConfigError("data.noise_scale must be > 0");
}

Dataset generate(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.num_samples;
  const std::size_t m = cfg.num_classes;
  const std::size_t d = cfg.feature_dim;

  auto centroid_rng = make_engine(derive_seed(cfg.seed, "centroids"));
  std::vector<std::vector<double>> centroid_a(m), centroid_v(m);
  for (std::size_t c = 0; c < m; ++c) {
    centroid_a[c] = gaussian_vector(centroid_rng, d, kCentroidScale);
    centroid_v[c] = gaussian_vector(centroid_rng, d, kCentroidScale);
  }

  // Class counts balanced within +-1.
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i % m;

  // Exactly round(rho * N) planted degraded samples.
  const auto n_degraded =
      static_cast<std::size_t>(std::llround(cfg.imbalance_fraction *
                                            static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto plant_rng = make_engine(derive_seed(cfg.seed, "plants"));
  std::shuffle(order.begin(), order.end(), plant_rng);
  std::vector<bool> degraded(n, false);
  for (std::size_t i = 0; i < n_degraded; ++i) degraded[order[i]] = true;

  Dataset ds;
  ds.config = cfg;
  ds.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = make_engine(derive_seed(cfg.seed, "sample", i));
    std::normal_distribution<double> noise(0.0, cfg.noise_scale);
    MultimodalSample& s = ds.samples[i];
    s.label = labels[i];
    s.planted_imbalanced = degraded[i];

    auto clean = [&](const std::vector<double>& centroid) {
      std::vector<double> x(d);
      for (std::size_t j = 0; j < d; ++j) x[j] = centroid[j] + noise(rng);
      return x;
    };
    auto degraded_features = [&]() -> std::vector<double> {
      if (cfg.degrade_mode == DegradeMode::kNoiseSwamp) {
        // Class-free noise centered at the origin.
        return gaussian_vector(rng, d, cfg.noise_scale);
      }
      std::uniform_int_distribution<std::size_t> other(0, m - 2);
      std::size_t c = other(rng);
      if (c >= s.label) ++c;
      const auto& wrong = cfg.degrade_modality_a ? centroid_a[c] : centroid_v[c];
      return clean(wrong);
    };

    if (!degraded[i]) {
      s.x_a = clean(centroid_a[s.label]);
      s.x_v = clean(centroid_v[s.label]);
    } else if (cfg.degrade_modality_a) {
      s.x_a = degraded_features();
      s.x_v = clean(centroid_v[s.label]);
    } else {
      s.x_a = clean(centroid_a[s.label]);
      s.x_v = degraded_features();
    }
  }

  auto shuffle_rng = make_engine(derive_seed(cfg.seed, "shuffle"));
  std::shuffle(ds.samples.begin(), ds.samples.end(), shuffle_rng);
  return ds;
}

SplitIndices split(const Dataset& dataset, const SplitFractions& fractions,
                   std::uint64_t seed) {
  const double sum = fractions.train + fractions.val + fractions.test;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1, got " +
                      std::to_string(sum));
  }
  if (fractions.train < 0.0 || fractions.val < 0.0 || fractions.test < 0.0) {
    throw ConfigError("split fractions must be nonnegative");
  }

  std::vector<std::vector<std::size_t>> by_class(dataset.num_classes());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_class[dataset.samples[i].label].push_back(i);
  }

  SplitIndices out;
  auto rng = make_engine(derive_seed(seed, "split"));
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto k = members.size();
    // Largest-remainder rounding keeps the split exhaustive per class.
    auto n_train = static_cast<std::size_t>(
        std::floor(fractions.train * static_cast<double>(k)));
    auto n_val = static_cast<std::size_t>(
        std::floor(fractions.val * static_cast<double>(k)));
    while (n_train + n_val > k) --n_train;
    std::size_t rest = k - n_train - n_val;
    // Give leftover fractional samples to train first, then val.
    while (n_train + n_val + rest > k) --rest;
    const std::size_t assigned = n_train + n_val + rest;
    for (std::size_t j = k; j-- > assigned;) members.pop_back();

    std::size_t pos = 0;
    for (std::size_t j = 0; j < n_train; ++j) out.train.push_back(members[pos++]);
    for (std::size_t j = 0; j < n_val; ++j) out.val.push_back(members[pos++]);
    for (std::size_t j = 0; j < rest; ++j) out.test.push_back(members[pos++]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace mmbal
