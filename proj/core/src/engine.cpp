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

#include "bht/engine.hpp"

#include <algorithm>
#include <span>
#include <stdexcept>

namespace bht {
namespace {

bool is_program_trap(StopReason r) {
  return r.kind == StopKind::kTrap && r.cause != TrapCause::kWatchdog;
}

bool is_cut(StopReason r) {
  return r.kind == StopKind::kQuantum || r == StopReason::trap(TrapCause::kWatchdog);
}

void notify(const PhaseObserver& observer, PhasePoint point, const ReliableStore& store) {
  if (observer) observer(point, store);
}

// One run of a PE from the store. `allowance` is what the watchdog still
// grants this treatment; faults in `events` strike just before the
// instruction whose index equals their tick.
ExecutionDigest execute_run(const ReliableStore& store, const ProgramImage& prog,
                            std::uint64_t quantum, std::uint64_t allowance,
                            std::span<FaultEvent> events, FaultInjector* injector) {
  MachineState state = store.fork_working();
  IoContext io{store.pending_inputs(prog), 0, {}};
  const std::uint64_t budget = std::min(quantum, allowance);
  const StopReason exhausted =
      budget < quantum ? StopReason::trap(TrapCause::kWatchdog) : StopReason::quantum();

  StopReason stop = exhausted;
  std::size_t next = 0;
  for (;;) {
    while (next < events.size() && events[next].tick <= state.instr_count) {
      apply_fault(events[next], state);
      if (injector != nullptr) injector->record(events[next]);
      ++next;
    }
    if (state.instr_count >= budget) {
      stop = exhausted;
      break;
    }
    std::uint64_t chunk = budget - state.instr_count;
    if (next < events.size()) chunk = std::min(chunk, events[next].tick - state.instr_count);
    const StopReason r = run_segment(state, prog, io, chunk);
    if (r.kind != StopKind::kQuantum) {
      stop = r;
      break;
    }
  }
  // Events scheduled past the end of the run never strike.
  for (; next < events.size(); ++next) {
    if (injector != nullptr) injector->record(events[next]);
  }
  return make_digest(state, io, stop);
}

struct Schedule {
  std::vector<FaultEvent> run1;
  std::vector<FaultEvent> run2;
  std::vector<FaultEvent> verify_early;  // before the comparison
  std::vector<FaultEvent> verify_late;   // after the comparison, before sealing
  std::vector<FaultEvent> store[3];      // per phase, applied at phase start
};

Schedule split(const std::vector<FaultEvent>& events, std::uint64_t verify_length) {
  Schedule s;
  for (const FaultEvent& e : events) {
    if (std::holds_alternative<StoreBit>(e.target)) {
      s.store[static_cast<int>(e.phase)].push_back(e);
      continue;
    }
    switch (e.phase) {
      case Phase::kRun1: s.run1.push_back(e); break;
      case Phase::kRun2: s.run2.push_back(e); break;
      case Phase::kVerifyCommit:
        (e.tick < verify_length / 2 ? s.verify_early : s.verify_late).push_back(e);
        break;
    }
  }
  return s;
}

void strike_store(std::vector<FaultEvent>& events, ReliableStore& store, FaultInjector& injector) {
  for (FaultEvent& e : events) {
    apply_fault(e, store, injector.mode());
    injector.record(e);
  }
}

void strike_digests(std::vector<FaultEvent>& events, std::vector<std::uint8_t>& b1,
                    std::vector<std::uint8_t>& b2, FaultInjector& injector) {
  for (FaultEvent& e : events) {
    // The geometry was sized from the fault-free digest; a faulty run can
    // leave shorter buffers, and a strike past their end hits nothing.
    const auto* t = std::get_if<DigestBit>(&e.target);
    if (t == nullptr || t->byte < b1.size() + b2.size()) apply_fault(e, b1, b2);
    injector.record(e);
  }
}

}  // namespace

TreatmentConfig TreatmentConfig::for_quantum(std::uint32_t q) {
  TreatmentConfig cfg;
  cfg.quantum = q;
  cfg.watchdog = std::uint64_t{4} * q;
  return cfg;
}

void TreatmentConfig::validate() const {
  if (quantum < 1) throw std::invalid_argument("quantum must be at least 1");
  if (watchdog < quantum) throw std::invalid_argument("watchdog must be at least the quantum");
  if (retry_limit < 1) throw std::invalid_argument("retry limit must be at least 1");
}

std::string_view to_string(TreatmentStatus status) {
  switch (status) {
    case TreatmentStatus::kCommitted: return "COMMITTED";
    case TreatmentStatus::kCommittedAfterRetry: return "COMMITTED_AFTER_RETRY";
    case TreatmentStatus::kFatalRetryExhausted: return "FATAL_RETRY_EXHAUSTED";
    case TreatmentStatus::kProgramTrap: return "PROGRAM_TRAP";
  }
  return "?";
}

std::string_view to_string(HardenedStatus status) {
  switch (status) {
    case HardenedStatus::kHalted: return "HALTED";
    case HardenedStatus::kProgramTrap: return "PROGRAM_TRAP";
    case HardenedStatus::kFatal: return "FATAL";
    case HardenedStatus::kPeLimit: return "PE_LIMIT";
  }
  return "?";
}

ExecutionDigest run_pe(const ReliableStore& store, const ProgramImage& prog,
                       const TreatmentConfig& cfg) {
  return execute_run(store, prog, cfg.quantum, cfg.watchdog, {}, nullptr);
}

TreatmentOutcome process_treatment(ReliableStore& store, const ProgramImage& prog,
                                   const TreatmentConfig& cfg, FaultInjector* injector,
                                   OutputSink& sink, const PhaseObserver& observer) {
  cfg.validate();
  if (store.halted()) throw std::logic_error("treatment requested on a halted program");

  TreatmentOutcome out;
  out.seq = store.commit_seq() + 1;
  const bool faulty = injector != nullptr && injector->active();

  WindowGeometry geometry;
  if (faulty) {
    // Fault-free probe to size the window. Simulation bookkeeping only; it
    // is not charged to the treatment.
    const ExecutionDigest probe = run_pe(store, prog, cfg);
    geometry.run1 = geometry.run2 = probe.instr_count;
    geometry.verify_commit = cfg.commit_cost.cost(probe.dirty_pages.size());
    geometry.page_count = store.page_count();
    geometry.digest_bytes = static_cast<std::uint32_t>(2 * serialize(probe).size());
  }

  std::uint64_t spent = 0;
  for (std::uint32_t attempt = 0; attempt <= cfg.retry_limit; ++attempt) {
    Schedule sched;
    if (faulty) sched = split(injector->arm(store.commit_seq(), attempt, geometry),
                              geometry.verify_commit);
    notify(observer, PhasePoint::kAttemptStart, store);

    if (faulty) strike_store(sched.store[0], store, *injector);
    const ExecutionDigest d1 =
        execute_run(store, prog, cfg.quantum, cfg.watchdog - spent, sched.run1, injector);
    spent += d1.instr_count;
    notify(observer, PhasePoint::kAfterRun1, store);

    if (faulty) strike_store(sched.store[1], store, *injector);
    const ExecutionDigest d2 =
        execute_run(store, prog, cfg.quantum, cfg.watchdog - spent, sched.run2, injector);
    spent += d2.instr_count;
    notify(observer, PhasePoint::kAfterRun2, store);

    out.instr_cost += d1.instr_count + d2.instr_count;
    out.commit_cost += cfg.commit_cost.cost(d1.dirty_pages.size());

    std::vector<std::uint8_t> b1 = serialize(d1);
    std::vector<std::uint8_t> b2 = serialize(d2);
    if (faulty) {
      strike_store(sched.store[2], store, *injector);
      strike_digests(sched.verify_early, b1, b2, *injector);
    }
    Comparison cmp = compare_buffers(b1, b2);
    if (faulty) strike_digests(sched.verify_late, b1, b2, *injector);
    // The record is sealed only if the buffers still agree right before it
    // is handed to the store.
    if (cmp.match) cmp = compare_buffers(b1, b2);
    notify(observer, PhasePoint::kAfterVerify, store);

    if (cmp.match) {
      const ExecutionDigest sealed = *deserialize(b1);
      if (is_program_trap(sealed.stop_reason)) {
        out.status = TreatmentStatus::kProgramTrap;
        out.trap_cause = sealed.stop_reason.cause;
        out.stop_reason = sealed.stop_reason;
        out.retries = attempt;
        return out;
      }
      if (sealed.stop_reason != StopReason::trap(TrapCause::kWatchdog)) {
        store.commit(to_commit_record(sealed, out.seq), sink);
        out.status = attempt == 0 ? TreatmentStatus::kCommitted
                                  : TreatmentStatus::kCommittedAfterRetry;
        out.retries = attempt;
        out.stop_reason = sealed.stop_reason;
        out.pe_length = sealed.instr_count;
        notify(observer, PhasePoint::kAfterCommit, store);
        return out;
      }
      // Both runs ran out of watchdog allowance: a hang, not a result.
      out.hang_detected = true;
    } else {
      if (out.mismatches == 0) out.first_mismatch = cmp.first_difference;
      if (d1.stop_reason != d2.stop_reason &&
          (is_cut(d1.stop_reason) || is_cut(d2.stop_reason))) {
        out.hang_detected = true;
      }
    }
    ++out.mismatches;
    notify(observer, PhasePoint::kAfterReject, store);
  }
  out.status = TreatmentStatus::kFatalRetryExhausted;
  out.retries = cfg.retry_limit;
  return out;
}

double HardenedRunStats::overhead() const {
  if (committed_instructions == 0) return 0.0;
  return static_cast<double>(hardened_instructions()) /
         static_cast<double>(committed_instructions);
}

double HardenedRunStats::self_stop_overhead() const {
  if (self_stop_plain == 0) return 0.0;
  return static_cast<double>(self_stop_hardened) / static_cast<double>(self_stop_plain);
}

double HardenedRunStats::timer_stop_overhead() const {
  if (timer_stop_plain == 0) return 0.0;
  return static_cast<double>(timer_stop_hardened) / static_cast<double>(timer_stop_plain);
}

HardenedRun run_hardened(const ProgramImage& prog, const TreatmentConfig& cfg,
                         FaultInjector* injector, const PhaseObserver& observer) {
  cfg.validate();
  HardenedRun run;
  run.store = ReliableStore::load(prog);
  VectorSink sink;

  while (!run.store.halted()) {
    if (run.stats.pe_count >= cfg.pe_limit) {
      run.status = HardenedStatus::kPeLimit;
      break;
    }
    const TreatmentOutcome o = process_treatment(run.store, prog, cfg, injector, sink, observer);
    HardenedRunStats& st = run.stats;
    const std::uint64_t cost = o.instr_cost + o.commit_cost;
    st.run_instructions += o.instr_cost;
    st.commit_instructions += o.commit_cost;
    st.retries += o.retries;
    st.mismatches += o.mismatches;
    if (o.hang_detected) ++st.hangs;
    run.outcomes.push_back(o);

    if (o.committed()) {
      ++st.pe_count;
      st.committed_instructions += o.pe_length;
      if (o.stop_reason.self_stop()) {
        ++st.self_stop_pes;
        st.self_stop_plain += o.pe_length;
        st.self_stop_hardened += cost;
      } else {
        ++st.timer_stop_pes;
        st.timer_stop_plain += o.pe_length;
        st.timer_stop_hardened += cost;
      }
    } else if (o.status == TreatmentStatus::kProgramTrap) {
      run.status = HardenedStatus::kProgramTrap;
      break;
    } else {
      run.status = HardenedStatus::kFatal;
      break;
    }
  }
  if (run.store.halted()) run.status = HardenedStatus::kHalted;
  run.outputs = sink.values();
  return run;
}

PlainRun run_plain(const ProgramImage& prog, std::uint64_t instruction_limit) {
  PlainRun out;
  out.state = initial_state(prog);
  IoContext io{std::span<const std::uint32_t>(prog.input_queue), 0, {}};
  out.stop = StopReason::quantum();
  while (!out.state.halted && out.state.instr_count < instruction_limit) {
    out.stop = run_segment(out.state, prog, io, instruction_limit - out.state.instr_count);
    if (out.stop.kind == StopKind::kYield) out.stop = StopReason::quantum();
  }
  out.outputs = std::move(io.outputs);
  out.instr_count = out.state.instr_count;
  out.inputs_consumed = io.consumed;
  return out;
}

std::optional<std::string> diff_against_oracle(const HardenedRun& run, const PlainRun& oracle) {
  const ReliableStore& s = run.store;
  const auto mem = s.memory();
  if (mem.size() != oracle.state.memory.size() ||
      !std::equal(mem.begin(), mem.end(), oracle.state.memory.begin())) {
    return "memory";
  }
  if (s.regs() != oracle.state.regs) return "regs";
  if (s.pc() != oracle.state.pc) return "pc";
  if (s.halted() != oracle.state.halted) return "halted";
  if (s.input_cursor() != oracle.inputs_consumed) return "inputs_consumed";
  if (run.outputs != oracle.outputs) return "outputs";
  return std::nullopt;
}

}  // namespace bht
