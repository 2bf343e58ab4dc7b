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

#ifndef BHT_STORE_HPP_
#define BHT_STORE_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "bht/isa.hpp"

namespace bht {

// Raised when an internal invariant of the hardening machinery is broken
// (commit sequence mismatch, a flip aimed at the immune store, ...).
class EngineAssertion : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class OutputSink {
 public:
  virtual ~OutputSink() = default;
  virtual void emit(std::uint32_t value) = 0;
};

class VectorSink final : public OutputSink {
 public:
  void emit(std::uint32_t value) override { values_.push_back(value); }
  const std::vector<std::uint32_t>& values() const { return values_; }

 private:
  std::vector<std::uint32_t> values_;
};

struct PageImage {
  std::uint32_t id = 0;
  std::array<std::uint32_t, kPageWords> words{};

  bool operator==(const PageImage&) const = default;
};

struct CommitRecord {
  std::uint64_t seq = 0;
  std::vector<PageImage> pages;
  std::array<std::uint32_t, kRegisterCount> regs{};
  std::uint32_t pc = 0;
  bool halted = false;
  std::uint64_t inputs_consumed = 0;
  std::vector<std::uint32_t> outputs;
  StopReason stop_reason;
};

// The immune central memory: the last correct execution point. It changes
// only through load() and commit(); the fault injector may touch it only in
// the store-violation campaign mode.
class ReliableStore {
 public:
  static ReliableStore load(const ProgramImage& image);

  // Working copy for one PE run. Two forks without an intervening commit are
  // bit-identical.
  MachineState fork_working() const;

  // All-or-nothing. Throws EngineAssertion on a sequence mismatch or a
  // malformed record, in which case nothing is applied and nothing emitted.
  void commit(const CommitRecord& record, OutputSink& sink);

  // Dropping a working copy never touches the store.
  static void discard(MachineState&& working) { MachineState dropped = std::move(working); }

  std::uint64_t checksum() const;

  std::uint32_t page_count() const { return page_count_; }
  std::span<const std::uint32_t> memory() const { return memory_; }
  const std::array<std::uint32_t, kRegisterCount>& regs() const { return regs_; }
  std::uint32_t pc() const { return pc_; }
  bool halted() const { return halted_; }
  std::uint64_t input_cursor() const { return input_cursor_; }
  std::uint64_t output_len() const { return output_len_; }
  std::uint64_t commit_seq() const { return commit_seq_; }
  const StopReason& last_stop() const { return last_stop_; }

  // Inputs latched for the next treatment.
  std::span<const std::uint32_t> pending_inputs(const ProgramImage& prog) const;

  // Lifts the immunity postulate: flips one bit of golden memory. Only the
  // fault module calls this, and only in store-violation mode.
  void flip_memory_bit(std::uint32_t page, std::uint32_t word, std::uint32_t bit);

  bool operator==(const ReliableStore&) const = default;

 private:
  std::uint32_t page_count_ = 0;
  std::vector<std::uint32_t> memory_;
  std::array<std::uint32_t, kRegisterCount> regs_{};
  std::uint32_t pc_ = 0;
  bool halted_ = false;
  std::uint64_t input_cursor_ = 0;
  std::uint64_t output_len_ = 0;
  std::uint64_t commit_seq_ = 0;
  StopReason last_stop_ = StopReason::yield();
};

}  // namespace bht

#endif  // BHT_STORE_HPP_
