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

#ifndef BHT_GENERATOR_HPP_
#define BHT_GENERATOR_HPP_

#include <cstdint>
#include <string>

#include "bht/isa.hpp"

namespace bht {

// Upper bound on loop trip counts; with no nesting and forward-only
// branches, a program of n instructions executes at most
// kMaxLoopTrips * n of them.
inline constexpr std::uint32_t kMaxLoopTrips = 16;

struct GeneratorOptions {
  std::uint32_t size = 64;  // instructions emitted, HALT included
  double yield_density = 0.0;
  std::uint32_t page_count = kDefaultPageCount;  // must be a power of two
  bool loops = true;
};

// Terminating, trap-free program text. Memory addresses are masked into
// range, loop counters are bounded, IN never outruns the input queue, and
// the last instruction is HALT. Same seed and options, same text.
std::string gen_program(std::uint64_t seed, const GeneratorOptions& options);
std::string gen_program(std::uint64_t seed, std::uint32_t size, double yield_density);

}  // namespace bht

#endif  // BHT_GENERATOR_HPP_
