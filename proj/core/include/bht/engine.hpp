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

#ifndef BHT_ENGINE_HPP_
#define BHT_ENGINE_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bht/digest.hpp"
#include "bht/fault.hpp"
#include "bht/isa.hpp"
#include "bht/store.hpp"

namespace bht {

// Instruction-equivalent charge for the verification and commit phase of
// one attempt: base + per_dirty_page * |dirty pages|.
struct CommitCostModel {
  std::uint32_t base = 5;
  std::uint32_t per_dirty_page = 2;

  std::uint64_t cost(std::size_t dirty_pages) const {
    return base + std::uint64_t{per_dirty_page} * dirty_pages;
  }
};

struct TreatmentConfig {
  std::uint32_t quantum = 100;     // timer-stop bound, in instructions
  std::uint32_t retry_limit = 3;   // re-executions allowed after the first attempt
  std::uint64_t watchdog = 400;    // instruction allowance per treatment, all attempts
  CommitCostModel commit_cost;
  std::uint64_t pe_limit = 10'000'000;

  // Q with the default watchdog of 4Q.
  static TreatmentConfig for_quantum(std::uint32_t q);

  // Throws std::invalid_argument unless Q >= 1, W >= Q and R >= 1.
  void validate() const;
};

enum class TreatmentStatus : std::uint8_t {
  kCommitted,
  kCommittedAfterRetry,
  kFatalRetryExhausted,
  kProgramTrap,
};

std::string_view to_string(TreatmentStatus status);

struct TreatmentOutcome {
  std::uint64_t seq = 0;  // commit sequence number the treatment targeted
  TreatmentStatus status = TreatmentStatus::kCommitted;
  std::uint32_t retries = 0;
  TrapCause trap_cause = TrapCause::kNone;
  StopReason stop_reason;
  std::uint64_t instr_cost = 0;   // both runs of every attempt
  std::uint64_t commit_cost = 0;  // verification/commit charge of every attempt
  std::uint64_t pe_length = 0;    // instructions in the committed PE
  std::uint32_t mismatches = 0;
  DigestField first_mismatch = DigestField::kNone;
  // A rejected attempt where a run was cut by the timer or watchdog while its
  // twin stopped on its own, or where both hit the watchdog.
  bool hang_detected = false;

  bool committed() const {
    return status == TreatmentStatus::kCommitted || status == TreatmentStatus::kCommittedAfterRetry;
  }
};

// Observation points inside a treatment, for atomicity checks.
enum class PhasePoint : std::uint8_t {
  kAttemptStart,
  kAfterRun1,
  kAfterRun2,
  kAfterVerify,
  kAfterCommit,
  kAfterReject,
};

using PhaseObserver = std::function<void(PhasePoint, const ReliableStore&)>;

// One fault-free PE run from the store's current state. The store is not
// modified.
ExecutionDigest run_pe(const ReliableStore& store, const ProgramImage& prog,
                       const TreatmentConfig& cfg);

// Fork, run twice, compare, then commit or reject and retry from the same
// store state. `injector` may be null for fault-free processing.
TreatmentOutcome process_treatment(ReliableStore& store, const ProgramImage& prog,
                                   const TreatmentConfig& cfg, FaultInjector* injector,
                                   OutputSink& sink, const PhaseObserver& observer = {});

struct HardenedRunStats {
  std::uint64_t pe_count = 0;           // committed treatments
  std::uint64_t run_instructions = 0;   // sum of instr_cost
  std::uint64_t commit_instructions = 0;
  std::uint64_t committed_instructions = 0;  // sum of committed PE lengths
  std::uint64_t retries = 0;
  std::uint64_t mismatches = 0;
  std::uint64_t hangs = 0;
  std::uint64_t self_stop_pes = 0;
  std::uint64_t timer_stop_pes = 0;
  // Per stop class: committed (plain) instructions and hardened cost.
  std::uint64_t self_stop_plain = 0;
  std::uint64_t self_stop_hardened = 0;
  std::uint64_t timer_stop_plain = 0;
  std::uint64_t timer_stop_hardened = 0;

  std::uint64_t hardened_instructions() const { return run_instructions + commit_instructions; }
  double overhead() const;
  double self_stop_overhead() const;
  double timer_stop_overhead() const;
};

enum class HardenedStatus : std::uint8_t { kHalted, kProgramTrap, kFatal, kPeLimit };

std::string_view to_string(HardenedStatus status);

struct HardenedRun {
  HardenedStatus status = HardenedStatus::kHalted;
  ReliableStore store;
  std::vector<TreatmentOutcome> outcomes;
  HardenedRunStats stats;
  std::vector<std::uint32_t> outputs;  // externally emitted, in order
};

HardenedRun run_hardened(const ProgramImage& prog, const TreatmentConfig& cfg,
                         FaultInjector* injector = nullptr,
                         const PhaseObserver& observer = {});

// Plain, uninterrupted, unhardened execution: the oracle.
struct PlainRun {
  MachineState state;
  std::vector<std::uint32_t> outputs;
  std::uint64_t instr_count = 0;
  std::uint64_t inputs_consumed = 0;
  StopReason stop;
};

PlainRun run_plain(const ProgramImage& prog, std::uint64_t instruction_limit = 1ull << 32);

// First difference between a hardened run's committed state and the oracle,
// or nullopt when they agree on memory, registers, pc, halt flag, consumed
// inputs and emitted output.
std::optional<std::string> diff_against_oracle(const HardenedRun& run, const PlainRun& oracle);

}  // namespace bht

#endif  // BHT_ENGINE_HPP_
