// SPDX-License-Identifier: Apache-2.0
#include "mmbal/tensor.hpp"

#include <cmath>

namespace mmbal {

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool Tensor2::all_finite() const { return mmbal::all_finite(data_); }

}  // namespace mmbal
