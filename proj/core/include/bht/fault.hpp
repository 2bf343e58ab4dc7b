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

#ifndef BHT_FAULT_HPP_
#define BHT_FAULT_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bht/isa.hpp"
#include "bht/store.hpp"

namespace bht {

// Phases of one treatment window: first run, second run, verification and
// commit. At most one fault per window in the single-fault mode.
enum class Phase : std::uint8_t { kRun1, kRun2, kVerifyCommit };

std::string_view to_string(Phase phase);

struct RegisterBit {
  std::uint32_t index = 0;
  std::uint32_t bit = 0;
  bool operator==(const RegisterBit&) const = default;
};
struct PcBit {
  std::uint32_t bit = 0;
  bool operator==(const PcBit&) const = default;
};
struct MemoryBit {
  std::uint32_t page = 0;
  std::uint32_t word = 0;
  std::uint32_t bit = 0;
  bool operator==(const MemoryBit&) const = default;
};
// Byte index runs over the two serialized digests back to back: bytes
// [0, n1) belong to the first run's buffer, the rest to the second's.
struct DigestBit {
  std::uint32_t byte = 0;
  std::uint32_t bit = 0;
  bool operator==(const DigestBit&) const = default;
};
// Golden copy in the reliable store. Legal only in kViolationStore.
struct StoreBit {
  std::uint32_t page = 0;
  std::uint32_t word = 0;
  std::uint32_t bit = 0;
  bool operator==(const StoreBit&) const = default;
};

using FaultTarget = std::variant<RegisterBit, PcBit, MemoryBit, DigestBit, StoreBit>;

std::string to_string(const FaultTarget& target);

struct FaultEvent {
  std::uint64_t treatment = 0;  // 0-based treatment index (store commit_seq when it began)
  std::uint32_t attempt = 0;    // 0 for the first try, n for the n-th retry
  Phase phase = Phase::kRun1;
  std::uint64_t tick = 0;  // instruction tick within the phase
  FaultTarget target = RegisterBit{};
  bool applied = false;

  bool operator==(const FaultEvent&) const = default;
};

enum class FaultMode : std::uint8_t {
  kNone,
  kSinglePerTreatment,
  kPoisson,
  kScripted,
  kViolationMulti,
  kViolationStore,
};

std::string_view to_string(FaultMode mode);
FaultMode fault_mode_from_string(std::string_view name);

struct FaultPlan {
  FaultMode mode = FaultMode::kNone;
  std::uint64_t seed = 0;
  // Chance that a treatment is struck at all (single, violation modes).
  double probability = 1.0;
  // Faults per instruction tick (Poisson mode).
  double rate = 0.0;
  // Events per struck window in violation-multi mode.
  std::uint32_t multi_count = 2;
  std::vector<FaultEvent> script;
};

// Parses a plan from JSON text. Scripted plans carry
// {"events": [{"treatment", "phase", "tick", "target": {...}}]}.
FaultPlan parse_fault_plan(std::string_view json_text);
FaultPlan load_fault_plan(const std::filesystem::path& path);
std::string fault_plan_to_json(const FaultPlan& plan);

// Nominal lengths of the three phases plus the shape of the attackable state.
struct WindowGeometry {
  std::uint64_t run1 = 0;
  std::uint64_t run2 = 0;
  std::uint64_t verify_commit = 0;
  std::uint32_t page_count = kDefaultPageCount;
  std::uint32_t digest_bytes = 0;  // both buffers together

  std::uint64_t length(Phase p) const;
  std::uint64_t total() const { return run1 + run2 + verify_commit; }
};

// Arrival ticks in [0, horizon) of a Poisson process with `rate` events per
// tick. Gaps are i.i.d. exponential.
std::vector<std::uint64_t> sample_arrivals(double rate, std::uint64_t horizon, std::uint64_t seed);
std::vector<std::uint64_t> sample_arrivals(double rate, std::uint64_t horizon,
                                           std::mt19937_64& rng);

// Flip exactly one bit and mark the event applied. A target the phase does
// not own (e.g. a digest byte against a machine state) is an EngineAssertion,
// and so is any store target outside kViolationStore.
void apply_fault(FaultEvent& event, MachineState& state);
void apply_fault(FaultEvent& event, std::span<std::uint8_t> digest1, std::span<std::uint8_t> digest2);
void apply_fault(FaultEvent& event, ReliableStore& store, FaultMode mode);

class FaultInjector {
 public:
  explicit FaultInjector(FaultPlan plan);

  // Builds the injection schedule for one treatment window, sorted by
  // (phase, tick). Throws EngineAssertion if the single-fault mode would
  // schedule more than one event.
  std::vector<FaultEvent> arm(std::uint64_t treatment, std::uint32_t attempt,
                              const WindowGeometry& geometry);

  // Whether windows need a geometry probe before they can be armed.
  bool active() const { return plan_.mode != FaultMode::kNone; }

  void record(const FaultEvent& event) { log_.push_back(event); }
  const std::vector<FaultEvent>& log() const { return log_; }
  std::size_t applied_count() const;

  FaultMode mode() const { return plan_.mode; }
  const FaultPlan& plan() const { return plan_; }

 private:
  FaultEvent random_event(std::uint64_t treatment, std::uint32_t attempt,
                          const WindowGeometry& g, bool store_target);
  FaultTarget random_target(Phase phase, const WindowGeometry& g);

  FaultPlan plan_;
  std::mt19937_64 rng_;
  std::vector<FaultEvent> log_;
};

}  // namespace bht

#endif  // BHT_FAULT_HPP_
