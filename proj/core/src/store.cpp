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

#include "bht/store.hpp"

#include <algorithm>
#include <string>

#include "bht/digest.hpp"

namespace bht {

ReliableStore ReliableStore::load(const ProgramImage& image) {
  const MachineState init = initial_state(image);
  ReliableStore store;
  store.page_count_ = image.page_count;
  store.memory_ = init.memory;
  return store;
}

MachineState ReliableStore::fork_working() const {
  MachineState s;
  s.regs = regs_;
  s.pc = pc_;
  s.halted = halted_;
  s.memory = memory_;
  s.dirty.assign(page_count_, 0);
  return s;
}

void ReliableStore::commit(const CommitRecord& record, OutputSink& sink) {
  // Validate everything before the first write.
  if (record.seq != commit_seq_ + 1) {
    throw EngineAssertion("commit sequence mismatch: expected " + std::to_string(commit_seq_ + 1) +
                          ", got " + std::to_string(record.seq));
  }
  for (const PageImage& p : record.pages) {
    if (p.id >= page_count_) {
      throw EngineAssertion("commit record names page " + std::to_string(p.id) +
                            " outside the store");
    }
  }

  for (const PageImage& p : record.pages) {
    std::copy(p.words.begin(), p.words.end(),
              memory_.begin() + static_cast<std::ptrdiff_t>(std::size_t{p.id} * kPageWords));
  }
  regs_ = record.regs;
  pc_ = record.pc;
  halted_ = record.halted;
  input_cursor_ += record.inputs_consumed;
  output_len_ += record.outputs.size();
  last_stop_ = record.stop_reason;
  ++commit_seq_;
  for (std::uint32_t v : record.outputs) sink.emit(v);
}

std::uint64_t ReliableStore::checksum() const {
  Fnv1a h;
  h.add_words(memory_);
  h.add_words(regs_);
  h.add_u32(pc_);
  h.add_u32(halted_ ? 1 : 0);
  h.add_u64(input_cursor_);
  h.add_u64(output_len_);
  h.add_u64(commit_seq_);
  return h.value();
}

std::span<const std::uint32_t> ReliableStore::pending_inputs(const ProgramImage& prog) const {
  std::span<const std::uint32_t> all(prog.input_queue);
  return all.subspan(std::min<std::size_t>(input_cursor_, all.size()));
}

void ReliableStore::flip_memory_bit(std::uint32_t page, std::uint32_t word, std::uint32_t bit) {
  if (page >= page_count_ || word >= kPageWords || bit >= 32) {
    throw EngineAssertion("store flip target out of range");
  }
  memory_[std::size_t{page} * kPageWords + word] ^= 1u << bit;
}

}  // namespace bht
