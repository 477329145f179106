// SPDX-License-Identifier: Apache-2.0
#include "mmbal/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mmbal/errors.hpp"
#include "mmbal/rng.hpp"

namespace mmbal {

namespace {

constexpr double kPiFloor = 1e-6;
constexpr double kLogTwoPi = 1.8378770664093453;  // ln(2*pi)

double gaussian_log_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * kLogTwoPi - std::log(sigma) - 0.5 * z * z;
}

double student_log_pdf(double x, double mu, double sigma, double nu) {
  const double z = (x - mu) / sigma;
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * M_PI) - std::log(sigma) -
         0.5 * (nu + 1.0) * std::log1p(z * z / nu);
}

struct Params {
  double pi0, mu0, sigma0;
  double pi1, mu1, sigma1;
};

double log_pdf(MixtureFamily family, double x, double mu, double sigma,
               double nu) {
  return family == MixtureFamily::kGaussian
             ? gaussian_log_pdf(x, mu, sigma)
             : student_log_pdf(x, mu, sigma, nu);
}

// Responsibilities of component 0 plus the data log-likelihood at `p`.
double e_step(const std::vector<double>& gaps, const Params& p,
              MixtureFamily family, double nu, std::vector<double>& resp0) {
  double ll = 0.0;
  const double lp0 = std::log(p.pi0);
  const double lp1 = std::log(p.pi1);
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double a = lp0 + log_pdf(family, gaps[i], p.mu0, p.sigma0, nu);
    const double b = lp1 + log_pdf(family, gaps[i], p.mu1, p.sigma1, nu);
    const double mx = std::max(a, b);
    const double lse = mx + std::log(std::exp(a - mx) + std::exp(b - mx));
    resp0[i] = std::exp(a - lse);
    ll += lse;
  }
  return ll;
}

Params init_median_split(const std::vector<double>& gaps, std::uint64_t seed) {
  std::vector<double> sorted = gaps;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const std::size_t half = n / 2;

  auto moments = [&](std::size_t lo, std::size_t hi) {
    double mean = 0.0;
    for (std::size_t i = lo; i < hi; ++i) mean += sorted[i];
    mean /= static_cast<double>(hi - lo);
    double var = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      var += (sorted[i] - mean) * (sorted[i] - mean);
    }
    var /= static_cast<double>(hi - lo);
    return std::pair{mean, std::sqrt(var)};
  };

  Params p{};
  auto [m0, s0] = moments(0, half);
  auto [m1, s1] = moments(half, n);
  const double spread = sorted.back() - sorted.front();
  auto rng = make_engine(derive_seed(seed, "em_init"));
  std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
  p.mu0 = m0 + jitter(rng) * spread;
  p.mu1 = m1 + jitter(rng) * spread;
  p.sigma0 = std::max(s0, kSigmaFloor);
  p.sigma1 = std::max(s1, kSigmaFloor);
  p.pi0 = static_cast<double>(half) / static_cast<double>(n);
  p.pi1 = 1.0 - p.pi0;
  return p;
}

void m_step_gaussian(const std::vector<double>& gaps,
                     const std::vector<double>& resp0, Params& p) {
  const double n = static_cast<double>(gaps.size());
  double n0 = 0.0, sum0 = 0.0, sum1 = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    n0 += resp0[i];
    sum0 += resp0[i] * gaps[i];
    sum1 += (1.0 - resp0[i]) * gaps[i];
  }
  const double n1 = n - n0;
  p.mu0 = sum0 / std::max(n0, 1e-12);
  p.mu1 = sum1 / std::max(n1, 1e-12);
  double v0 = 0.0, v1 = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double d0 = gaps[i] - p.mu0;
    const double d1 = gaps[i] - p.mu1;
    v0 += resp0[i] * d0 * d0;
    v1 += (1.0 - resp0[i]) * d1 * d1;
  }
  p.sigma0 = std::max(std::sqrt(v0 / std::max(n0, 1e-12)), kSigmaFloor);
  p.sigma1 = std::max(std::sqrt(v1 / std::max(n1, 1e-12)), kSigmaFloor);
  p.pi0 = std::clamp(n0 / n, kPiFloor, 1.0 - kPiFloor);
  p.pi1 = 1.0 - p.pi0;
}

// Fixed-nu ECM update with latent scale weights u = (nu+1)/(nu + z^2).
void m_step_student(const std::vector<double>& gaps,
                    const std::vector<double>& resp0, double nu, Params& p) {
  const double n = static_cast<double>(gaps.size());
  double n0 = 0.0, n1 = 0.0;
  double ru0 = 0.0, ru1 = 0.0;
  double rug0 = 0.0, rug1 = 0.0;
  std::vector<double> u0(gaps.size()), u1(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double z0 = (gaps[i] - p.mu0) / p.sigma0;
    const double z1 = (gaps[i] - p.mu1) / p.sigma1;
    u0[i] = (nu + 1.0) / (nu + z0 * z0);
    u1[i] = (nu + 1.0) / (nu + z1 * z1);
    const double r0 = resp0[i];
    const double r1 = 1.0 - r0;
    n0 += r0;
    n1 += r1;
    ru0 += r0 * u0[i];
    ru1 += r1 * u1[i];
    rug0 += r0 * u0[i] * gaps[i];
    rug1 += r1 * u1[i] * gaps[i];
  }
  p.mu0 = rug0 / std::max(ru0, 1e-12);
  p.mu1 = rug1 / std::max(ru1, 1e-12);
  double v0 = 0.0, v1 = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double d0 = gaps[i] - p.mu0;
    const double d1 = gaps[i] - p.mu1;
    v0 += resp0[i] * u0[i] * d0 * d0;
    v1 += (1.0 - resp0[i]) * u1[i] * d1 * d1;
  }
  p.sigma0 = std::max(std::sqrt(v0 / std::max(n0, 1e-12)), kSigmaFloor);
  p.sigma1 = std::max(std::sqrt(v1 / std::max(n1, 1e-12)), kSigmaFloor);
  p.pi0 = std::clamp(n0 / n, kPiFloor, 1.0 - kPiFloor);
  p.pi1 = 1.0 - p.pi0;
}

}  // namespace

MixtureFit fit_mixture(const GapSet& gaps, MixtureFamily family,
                       const MixtureOptions& options) {
  const std::vector<double>& g = gaps.gaps;
  if (g.size() < kMinFitSamples) {
    throw InsufficientDataError("fit_mixture: need at least " +
                                std::to_string(kMinFitSamples) +
                                " gaps, got " + std::to_string(g.size()));
  }
  if (!all_finite(g)) throw NumericalError("fit_mixture: non-finite gaps");
  if (family == MixtureFamily::kStudentT && !(options.nu > 2.0)) {
    throw ConfigError("fit_mixture: StudentT nu must be > 2");
  }
  const auto [mn, mx] = std::minmax_element(g.begin(), g.end());
  if (*mx - *mn < 1e-9) {
    throw DegenerateDataError("fit_mixture: all gaps identical within 1e-9");
  }

  Params p = init_median_split(g, options.seed);
  std::vector<double> resp0(g.size());
  MixtureFit fit;
  fit.family = family;
  fit.nu = options.nu;

  double prev_ll = -std::numeric_limits<double>::infinity();
  std::size_t m_steps = 0;
  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    const double ll = e_step(g, p, family, options.nu, resp0);
    fit.loglik_trace.push_back(ll);
    if (iter > 0 &&
        std::abs(ll - prev_ll) / (std::abs(prev_ll) + 1e-12) < options.tol) {
      fit.converged = true;
      break;
    }
    prev_ll = ll;
    if (family == MixtureFamily::kGaussian) {
      m_step_gaussian(g, resp0, p);
    } else {
      m_step_student(g, resp0, options.nu, p);
    }
    ++m_steps;
  }
  if (!fit.converged) {
    // Likelihood of the final parameters after the last M-step.
    fit.loglik_trace.push_back(e_step(g, p, family, options.nu, resp0));
  }
  fit.pi0 = p.pi0;
  fit.pi1 = p.pi1;
  fit.mu0 = p.mu0;
  fit.mu1 = p.mu1;
  fit.sigma0 = p.sigma0;
  fit.sigma1 = p.sigma1;
  fit.log_likelihood = fit.loglik_trace.back();
  fit.iterations = m_steps;
  return order_components(std::move(fit));
}

MixtureFit order_components(MixtureFit fit) {
  bool swap = false;
  if (std::abs(fit.pi0 - fit.pi1) < 1e-6) {
    swap = std::abs(fit.mu1) < std::abs(fit.mu0);
  } else {
    swap = fit.pi1 > fit.pi0;
  }
  if (swap) {
    std::swap(fit.pi0, fit.pi1);
    std::swap(fit.mu0, fit.mu1);
    std::swap(fit.sigma0, fit.sigma1);
  }
  return fit;
}

double component_log_pdf(const MixtureFit& fit, int component, double g) {
  const double mu = component == 0 ? fit.mu0 : fit.mu1;
  const double sigma = component == 0 ? fit.sigma0 : fit.sigma1;
  return fit.family == MixtureFamily::kGaussian
             ? gaussian_log_pdf(g, mu, sigma)
             : student_log_pdf(g, mu, sigma, fit.nu);
}

Posterior posterior(double g, const MixtureFit& fit) {
  if (fit.collapsed) return {1.0, 0.0};
  const double a = std::log(fit.pi0) + component_log_pdf(fit, 0, g);
  const double b = std::log(fit.pi1) + component_log_pdf(fit, 1, g);
  const double mx = std::max(a, b);
  const double lse = mx + std::log(std::exp(a - mx) + std::exp(b - mx));
  return {std::exp(a - lse), std::exp(b - lse)};
}

std::vector<Posterior> posterior_all(const GapSet& gaps, const MixtureFit& fit) {
  std::vector<Posterior> out;
  out.reserve(gaps.size());
  for (double g : gaps.gaps) out.push_back(posterior(g, fit));
  return out;
}

MixtureFit collapsed_fit(double gap_value, MixtureFamily family) {
  MixtureFit fit;
  fit.family = family;
  fit.collapsed = true;
  fit.pi0 = 1.0 - kPiFloor;
  fit.pi1 = kPiFloor;
  fit.mu0 = gap_value;
  fit.mu1 = gap_value;
  fit.sigma0 = kSigmaFloor;
  fit.sigma1 = kSigmaFloor;
  fit.converged = true;
  return fit;
}

std::string to_string(MixtureFamily family) {
  return family == MixtureFamily::kGaussian ? "gaussian" : "student_t";
}

MixtureFamily mixture_family_from_string(const std::string& s) {
  if (s == "gaussian") return MixtureFamily::kGaussian;
  if (s == "student_t") return MixtureFamily::kStudentT;
  throw ConfigError("unknown mixture family: " + s);
}

}  // namespace mmbal
