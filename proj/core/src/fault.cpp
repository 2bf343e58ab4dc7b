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

#include "bht/fault.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace bht {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::uint64_t uniform(std::mt19937_64& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

void check_bit(std::uint32_t bit) {
  if (bit >= 32) throw EngineAssertion("fault bit index out of range");
}

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kRun1: return "run1";
    case Phase::kRun2: return "run2";
    case Phase::kVerifyCommit: return "verify_commit";
  }
  return "?";
}

std::string to_string(const FaultTarget& target) {
  return std::visit(
      Overloaded{
          [](const RegisterBit& t) {
            return "reg:R" + std::to_string(t.index) + ":" + std::to_string(t.bit);
          },
          [](const PcBit& t) { return "pc:" + std::to_string(t.bit); },
          [](const MemoryBit& t) {
            return "mem:" + std::to_string(t.page) + ":" + std::to_string(t.word) + ":" +
                   std::to_string(t.bit);
          },
          [](const DigestBit& t) {
            return "digest:" + std::to_string(t.byte) + ":" + std::to_string(t.bit);
          },
          [](const StoreBit& t) {
            return "store:" + std::to_string(t.page) + ":" + std::to_string(t.word) + ":" +
                   std::to_string(t.bit);
          },
      },
      target);
}

std::string_view to_string(FaultMode mode) {
  switch (mode) {
    case FaultMode::kNone: return "none";
    case FaultMode::kSinglePerTreatment: return "single";
    case FaultMode::kPoisson: return "poisson";
    case FaultMode::kScripted: return "scripted";
    case FaultMode::kViolationMulti: return "violation_multi";
    case FaultMode::kViolationStore: return "violation_store";
  }
  return "?";
}

FaultMode fault_mode_from_string(std::string_view name) {
  if (name == "none") return FaultMode::kNone;
  if (name == "single" || name == "single_per_treatment") return FaultMode::kSinglePerTreatment;
  if (name == "poisson") return FaultMode::kPoisson;
  if (name == "scripted") return FaultMode::kScripted;
  if (name == "violation_multi") return FaultMode::kViolationMulti;
  if (name == "violation_store") return FaultMode::kViolationStore;
  throw std::invalid_argument("unknown fault mode '" + std::string(name) + "'");
}

std::uint64_t WindowGeometry::length(Phase p) const {
  switch (p) {
    case Phase::kRun1: return run1;
    case Phase::kRun2: return run2;
    case Phase::kVerifyCommit: return verify_commit;
  }
  return 0;
}

std::vector<std::uint64_t> sample_arrivals(double rate, std::uint64_t horizon,
                                           std::mt19937_64& rng) {
  if (rate < 0.0) throw std::invalid_argument("fault rate must be non-negative");
  std::vector<std::uint64_t> ticks;
  if (rate == 0.0 || horizon == 0) return ticks;
  std::exponential_distribution<double> gap(rate);
  double t = 0.0;
  const auto end = static_cast<double>(horizon);
  for (;;) {
    t += gap(rng);
    if (t >= end) break;
    ticks.push_back(static_cast<std::uint64_t>(t));
  }
  return ticks;
}

std::vector<std::uint64_t> sample_arrivals(double rate, std::uint64_t horizon,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_arrivals(rate, horizon, rng);
}

void apply_fault(FaultEvent& event, MachineState& state) {
  std::visit(Overloaded{
                 [&](const RegisterBit& t) {
                   check_bit(t.bit);
                   if (t.index >= kRegisterCount) throw EngineAssertion("register out of range");
                   state.regs[t.index] ^= 1u << t.bit;
                 },
                 [&](const PcBit& t) {
                   check_bit(t.bit);
                   state.pc ^= 1u << t.bit;
                 },
                 [&](const MemoryBit& t) {
                   check_bit(t.bit);
                   if (t.page >= state.page_count() || t.word >= kPageWords) {
                     throw EngineAssertion("memory fault target out of range");
                   }
                   // A flip is not a write: the page does not become dirty.
                   state.memory[std::size_t{t.page} * kPageWords + t.word] ^= 1u << t.bit;
                 },
                 [](const DigestBit&) {
                   throw EngineAssertion("digest fault applied to a machine state");
                 },
                 [](const StoreBit&) {
                   throw EngineAssertion("reliable store is exempt from injection");
                 },
             },
             event.target);
  event.applied = true;
}

void apply_fault(FaultEvent& event, std::span<std::uint8_t> digest1,
                 std::span<std::uint8_t> digest2) {
  const auto* t = std::get_if<DigestBit>(&event.target);
  if (t == nullptr) throw EngineAssertion("verification-phase fault must target a digest buffer");
  if (t->bit >= 8) throw EngineAssertion("digest bit index out of range");
  if (t->byte < digest1.size()) {
    digest1[t->byte] ^= static_cast<std::uint8_t>(1u << t->bit);
  } else if (t->byte - digest1.size() < digest2.size()) {
    digest2[t->byte - digest1.size()] ^= static_cast<std::uint8_t>(1u << t->bit);
  } else {
    throw EngineAssertion("digest fault byte out of range");
  }
  event.applied = true;
}

void apply_fault(FaultEvent& event, ReliableStore& store, FaultMode mode) {
  const auto* t = std::get_if<StoreBit>(&event.target);
  if (t == nullptr) throw EngineAssertion("store fault must carry a store target");
  if (mode != FaultMode::kViolationStore) {
    throw EngineAssertion("reliable store is exempt from injection outside violation_store mode");
  }
  store.flip_memory_bit(t->page, t->word, t->bit);
  event.applied = true;
}

FaultInjector::FaultInjector(FaultPlan plan) : plan_(std::move(plan)), rng_(plan_.seed) {
  if (plan_.probability < 0.0 || plan_.probability > 1.0) {
    throw std::invalid_argument("fault probability must lie in [0, 1]");
  }
  if (plan_.rate < 0.0) throw std::invalid_argument("fault rate must be non-negative");
}

std::size_t FaultInjector::applied_count() const {
  return static_cast<std::size_t>(
      std::count_if(log_.begin(), log_.end(), [](const FaultEvent& e) { return e.applied; }));
}

FaultTarget FaultInjector::random_target(Phase phase, const WindowGeometry& g) {
  if (phase == Phase::kVerifyCommit) {
    return DigestBit{static_cast<std::uint32_t>(uniform(rng_, std::max<std::uint32_t>(g.digest_bytes, 1))),
                     static_cast<std::uint32_t>(uniform(rng_, 8))};
  }
  // Target class first, then a uniform bit inside it; otherwise memory
  // would absorb nearly every strike.
  switch (uniform(rng_, 3)) {
    case 0:
      return RegisterBit{static_cast<std::uint32_t>(uniform(rng_, kRegisterCount)),
                         static_cast<std::uint32_t>(uniform(rng_, 32))};
    case 1: return PcBit{static_cast<std::uint32_t>(uniform(rng_, 32))};
    default:
      return MemoryBit{static_cast<std::uint32_t>(uniform(rng_, g.page_count)),
                       static_cast<std::uint32_t>(uniform(rng_, kPageWords)),
                       static_cast<std::uint32_t>(uniform(rng_, 32))};
  }
}

FaultEvent FaultInjector::random_event(std::uint64_t treatment, std::uint32_t attempt,
                                       const WindowGeometry& g, bool store_target) {
  FaultEvent ev;
  ev.treatment = treatment;
  ev.attempt = attempt;
  // Uniform position over the whole window weights phases by their length.
  std::uint64_t pos = uniform(rng_, g.total());
  for (Phase p : {Phase::kRun1, Phase::kRun2, Phase::kVerifyCommit}) {
    if (pos < g.length(p)) {
      ev.phase = p;
      ev.tick = pos;
      break;
    }
    pos -= g.length(p);
  }
  if (store_target) {
    ev.target = StoreBit{static_cast<std::uint32_t>(uniform(rng_, g.page_count)),
                         static_cast<std::uint32_t>(uniform(rng_, kPageWords)),
                         static_cast<std::uint32_t>(uniform(rng_, 32))};
  } else {
    ev.target = random_target(ev.phase, g);
  }
  return ev;
}

std::vector<FaultEvent> FaultInjector::arm(std::uint64_t treatment, std::uint32_t attempt,
                                           const WindowGeometry& g) {
  std::vector<FaultEvent> schedule;
  auto struck = [&] {
    return std::bernoulli_distribution(plan_.probability)(rng_);
  };

  switch (plan_.mode) {
    case FaultMode::kNone:
      break;
    case FaultMode::kScripted:
      for (const FaultEvent& e : plan_.script) {
        if (e.treatment == treatment && e.attempt == attempt) {
          FaultEvent copy = e;
          copy.applied = false;
          schedule.push_back(copy);
        }
      }
      break;
    case FaultMode::kSinglePerTreatment:
      // Retries are new windows of the same treatment; the postulate allows
      // one error for the whole treatment, so only the first try is struck.
      if (attempt == 0 && g.total() > 0 && struck()) {
        schedule.push_back(random_event(treatment, attempt, g, false));
      }
      break;
    case FaultMode::kViolationMulti:
      if (attempt == 0 && g.total() > 0 && struck()) {
        for (std::uint32_t i = 0; i < plan_.multi_count; ++i) {
          schedule.push_back(random_event(treatment, attempt, g, false));
        }
      }
      break;
    case FaultMode::kViolationStore:
      if (attempt == 0 && g.total() > 0 && struck()) {
        schedule.push_back(random_event(treatment, attempt, g, true));
      }
      break;
    case FaultMode::kPoisson:
      for (std::uint64_t tick : sample_arrivals(plan_.rate, g.total(), rng_)) {
        FaultEvent ev;
        ev.treatment = treatment;
        ev.attempt = attempt;
        for (Phase p : {Phase::kRun1, Phase::kRun2, Phase::kVerifyCommit}) {
          if (tick < g.length(p)) {
            ev.phase = p;
            ev.tick = tick;
            break;
          }
          tick -= g.length(p);
        }
        ev.target = random_target(ev.phase, g);
        schedule.push_back(ev);
      }
      break;
  }

  std::stable_sort(schedule.begin(), schedule.end(), [](const FaultEvent& a, const FaultEvent& b) {
    return std::tie(a.phase, a.tick) < std::tie(b.phase, b.tick);
  });
  if (plan_.mode == FaultMode::kSinglePerTreatment && schedule.size() > 1) {
    throw EngineAssertion("single-fault mode scheduled more than one event in a window");
  }
  return schedule;
}

}  // namespace bht
