// SPDX-License-Identifier: Apache-2.0
#include "mmbal/optim.hpp"

#include <cmath>
#include <string>

#include "mmbal/errors.hpp"

namespace mmbal {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw ConfigError("optimizer.learning_rate must be > 0");
  }
  if (momentum < 0.0 || momentum >= 1.0) {
    throw ConfigError("optimizer.momentum must be in [0, 1)");
  }
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 ||
      adam_beta2 >= 1.0 || !(adam_eps > 0.0)) {
    throw ConfigError("optimizer adam hyperparameters out of range");
  }
}

void OptimizerState::init_buffers(std::span<const std::span<double>> params) {
  moment1.clear();
  moment2.clear();
  for (const auto& p : params) moment1.emplace_back(p.size(), 0.0);
  if (config.kind == OptimizerKind::kAdam) {
    for (const auto& p : params) moment2.emplace_back(p.size(), 0.0);
  }
  step_count = 0;
}

bool OptimizerState::buffers_match(
    std::span<const std::span<double>> params) const {
  if (moment1.size() != params.size()) return false;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (moment1[i].size() != params[i].size()) return false;
  }
  if (config.kind == OptimizerKind::kAdam && moment2.size() != params.size()) {
    return false;
  }
  return true;
}

OptimizerState make_optimizer(const OptimizerConfig& cfg,
                              std::span<const std::span<double>> params) {
  cfg.validate();
  OptimizerState state;
  state.config = cfg;
  state.init_buffers(params);
  return state;
}

void optimizer_step(std::span<const std::span<double>> params,
                    std::span<const std::span<const double>> grads,
                    OptimizerState& state) {
  if (params.size() != grads.size() || !state.buffers_match(params)) {
    throw ShapeError("optimizer_step: parameter/gradient/buffer shape mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != grads[i].size()) {
      throw ShapeError("optimizer_step: grad size mismatch at view " +
                       std::to_string(i));
    }
  }
  state.step_count += 1;
  const OptimizerConfig& c = state.config;
  if (c.kind == OptimizerKind::kSgdMomentum) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& v = state.moment1[i];
      auto p = params[i];
      auto g = grads[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        v[j] = c.momentum * v[j] + g[j];
        p[j] -= c.learning_rate * v[j];
      }
    }
  } else {
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(c.adam_beta1, t);
    const double bc2 = 1.0 - std::pow(c.adam_beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& m = state.moment1[i];
      auto& v = state.moment2[i];
      auto p = params[i];
      auto g = grads[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        m[j] = c.adam_beta1 * m[j] + (1.0 - c.adam_beta1) * g[j];
        v[j] = c.adam_beta2 * v[j] + (1.0 - c.adam_beta2) * g[j] * g[j];
        const double mhat = m[j] / bc1;
        const double vhat = v[j] / bc2;
        p[j] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.adam_eps);
      }
    }
  }
}

OptimizerState reset_optimizer(const OptimizerState& state) {
  OptimizerState fresh;
  fresh.config = state.config;
  fresh.moment1 = state.moment1;
  fresh.moment2 = state.moment2;
  for (auto& buf : fresh.moment1) buf.assign(buf.size(), 0.0);
  for (auto& buf : fresh.moment2) buf.assign(buf.size(), 0.0);
  fresh.step_count = 0;
  return fresh;
}

}  // namespace mmbal
