// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mmbal {

enum class OptimizerKind : std::uint8_t { kSgdMomentum = 0, kAdam = 1 };
enum class ResetPolicy : std::uint8_t { kReset = 0, kSame = 1 };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgdMomentum;
  double learning_rate = 2e-3;
  double momentum = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  ResetPolicy reset_policy = ResetPolicy::kReset;
  double clip_norm = 5.0;  // global gradient-norm clip; <= 0 disables

  void validate() const;
};

// Accumulator buffers are laid out to mirror the parameter views passed at
// init time; a shape mismatch at step time is an error.
struct OptimizerState {
  OptimizerConfig config;
  std::vector<std::vector<double>> moment1;  // SGD velocity / Adam m
  std::vector<std::vector<double>> moment2;  // Adam v (empty for SGD)
  std::uint64_t step_count = 0;

  void init_buffers(std::span<const std::span<double>> params);
  bool buffers_match(std::span<const std::span<double>> params) const;
};

OptimizerState make_optimizer(const OptimizerConfig& cfg,
                              std::span<const std::span<double>> params);

// SgdMomentum: v <- momentum*v + g; p <- p - lr*v.
// Adam: bias-corrected first/second moment update.
void optimizer_step(std::span<const std::span<double>> params,
                    std::span<const std::span<const double>> grads,
                    OptimizerState& state);

// Accumulators and step counter zeroed, hyperparameters preserved.
OptimizerState reset_optimizer(const OptimizerState& state);

}  // namespace mmbal
