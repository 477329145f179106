// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmbal/gap.hpp"

namespace mmbal {

enum class MixtureFamily : std::uint8_t { kGaussian = 0, kStudentT = 1 };

struct MixtureOptions {
  std::size_t max_iter = 200;
  double tol = 1e-6;  // relative log-likelihood change
  std::uint64_t seed = 0;
  double nu = 4.0;  // StudentT degrees of freedom, fixed (not estimated)
};

// Two-component 1-D mixture ordered so component 0 is "balanced": the one
// with the larger mixing weight, ties broken by smaller |mu|.
struct MixtureFit {
  MixtureFamily family = MixtureFamily::kGaussian;
  double pi0 = 0.5, pi1 = 0.5;
  double mu0 = 0.0, mu1 = 0.0;
  double sigma0 = 1.0, sigma1 = 1.0;
  double nu = 4.0;  // meaningful for StudentT only
  double log_likelihood = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  // Sentinel for degenerate gap sets (all values identical): every sample is
  // treated as balanced, posterior() returns (1, 0).
  bool collapsed = false;
  std::vector<double> loglik_trace;  // per EM iteration
};

struct Posterior {
  double w0 = 1.0;
  double w1 = 0.0;
};

// Scale floor in gap units; prevents component collapse when near-converged
// training concentrates gaps sharply.
inline constexpr double kSigmaFloor = 1e-4;
inline constexpr std::size_t kMinFitSamples = 10;

// EM to convergence (relative log-likelihood change < tol) or max_iter.
// Throws InsufficientDataError for N < 10, DegenerateDataError when all gaps
// are within 1e-9 of each other.
MixtureFit fit_mixture(const GapSet& gaps, MixtureFamily family,
                       const MixtureOptions& options = {});

// Larger mixing weight becomes component 0; |pi0 - pi1| < 1e-6 breaks the
// tie by smaller |mu|.
MixtureFit order_components(MixtureFit fit);

// Bayes responsibilities of the two components at gap value g, computed via
// log-pdfs with log-sum-exp. Total on finite g.
Posterior posterior(double g, const MixtureFit& fit);

std::vector<Posterior> posterior_all(const GapSet& gaps, const MixtureFit& fit);

// The sentinel used when fitting is impossible; mu0 set to the common value.
MixtureFit collapsed_fit(double gap_value, MixtureFamily family);

double component_log_pdf(const MixtureFit& fit, int component, double g);

std::string to_string(MixtureFamily family);
MixtureFamily mixture_family_from_string(const std::string& s);

}  // namespace mmbal
