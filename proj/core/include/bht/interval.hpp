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

#ifndef BHT_INTERVAL_HPP_
#define BHT_INTERVAL_HPP_

#include <cstdint>
#include <limits>

namespace bht {

// Returned by max_interval() when the error rate is zero.
inline constexpr double kUnboundedInterval = std::numeric_limits<double>::infinity();

// Probability of two or more Poisson events in a window of length T at rate
// lambda: 1 - e^(-lambda T) (1 + lambda T). Requires rate >= 0, T >= 0.
double p_multi(double rate, double window);

// Largest window T with p_multi(rate, T) <= epsilon, by bisection on lambda T
// to a relative tolerance of 1e-9. Memorylessness makes the answer
// independent of where the window starts. Requires 0 < epsilon < 1 and
// rate >= 0; rate == 0 yields kUnboundedInterval.
double max_interval(double rate, double epsilon);

// Recommended timer quantum for a window of `t_max` time units on a machine
// running `instructions_per_unit` instructions per unit. A treatment window
// holds two PE runs plus verification and commit, so
//   Q = floor(t_max * ips / (2 + commit_fraction)),
// where commit_fraction is the commit cost expressed as a fraction of Q.
// Throws std::invalid_argument when Q would be below 1 (raise epsilon or
// lower the rate) or on non-positive inputs.
std::uint64_t quantum_from_interval(double t_max, double instructions_per_unit,
                                    double commit_fraction = 0.1);

}  // namespace bht

#endif  // BHT_INTERVAL_HPP_
