// Copyright 2026 The bht-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bht/interval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bht {
namespace {

// P(N >= 2) as a function of the mean x = lambda T.
double tail_two(double x) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < 0.1) {
    // Alternating series sum_{k>=2} (-1)^k (k-1) x^k / k!; avoids the
    // cancellation in 1 - e^-x (1 + x) for small means.
    double term = x * x / 2.0;  // x^k / k! at k = 2
    double sum = 0.0;
    for (int k = 2; k < 40; ++k) {
      const double contrib = (k % 2 == 0 ? 1.0 : -1.0) * (k - 1) * term;
      sum += contrib;
      if (std::fabs(contrib) < 1e-18 * sum) break;
      term *= x / (k + 1);
    }
    return sum;
  }
  return -std::expm1(-x) - x * std::exp(-x);
}

}  // namespace

double p_multi(double rate, double window) {
  if (rate < 0.0 || window < 0.0) throw std::invalid_argument("rate and window must be >= 0");
  return tail_two(rate * window);
}

double max_interval(double rate, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (rate < 0.0) throw std::invalid_argument("rate must be >= 0");
  if (rate == 0.0) return kUnboundedInterval;

  // Solve tail_two(x) = epsilon for the mean x, then scale by 1/rate.
  double lo = 0.0;
  double hi = 1.0;
  while (tail_two(hi) <= epsilon) hi *= 2.0;
  while (hi - lo > 1e-10 * hi) {
    const double mid = lo + (hi - lo) / 2.0;
    if (tail_two(mid) <= epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo / rate;
}

std::uint64_t quantum_from_interval(double t_max, double instructions_per_unit,
                                    double commit_fraction) {
  if (!(t_max > 0.0) || !(instructions_per_unit > 0.0) || commit_fraction < 0.0) {
    throw std::invalid_argument("interval and instruction rate must be positive");
  }
  constexpr double kCap = 4294967295.0;
  const double window = t_max * instructions_per_unit;
  const double q = std::floor(window / (2.0 + commit_fraction));
  if (q < 1.0) {
    throw std::invalid_argument(
        "treatment window holds less than one instruction per run; raise epsilon or revise the "
        "error rate");
  }
  return static_cast<std::uint64_t>(std::min(q, kCap));
}

}  // namespace bht
