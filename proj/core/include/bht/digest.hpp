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

#ifndef BHT_DIGEST_HPP_
#define BHT_DIGEST_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bht/isa.hpp"
#include "bht/store.hpp"

namespace bht {

class Fnv1a {
 public:
  void add_byte(std::uint8_t b) {
    h_ ^= b;
    h_ *= 0x100000001B3ull;
  }
  void add_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) add_byte(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void add_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) add_byte(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void add_words(std::span<const std::uint32_t> words) {
    for (std::uint32_t w : words) add_u32(w);
  }
  void add_bytes(std::span<const std::uint8_t> bytes) {
    for (std::uint8_t b : bytes) add_byte(b);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ull;
};

// The execution trace compared between the two runs of a PE: everything the
// run could make observable once committed.
struct ExecutionDigest {
  std::array<std::uint32_t, kRegisterCount> regs{};
  std::uint32_t pc = 0;
  bool halted = false;
  std::vector<PageImage> dirty_pages;  // ascending page id
  std::vector<std::uint32_t> outputs;
  std::uint64_t inputs_consumed = 0;
  StopReason stop_reason;
  std::uint64_t instr_count = 0;
  // Diagnostic only. Equality is decided on full content.
  std::uint64_t checksum = 0;

  bool operator==(const ExecutionDigest&) const = default;
};

ExecutionDigest make_digest(const MachineState& state, const IoContext& io, StopReason stop);

// Checksum over every field except `checksum` itself.
std::uint64_t content_checksum(const ExecutionDigest& d);

// Canonical little-endian byte layout. This is the buffer that sits in
// unreliable memory during verification, so it is what faults can hit.
std::vector<std::uint8_t> serialize(const ExecutionDigest& d);
std::optional<ExecutionDigest> deserialize(std::span<const std::uint8_t> bytes);

// Declaration order doubles as comparison order.
enum class DigestField : std::uint8_t {
  kNone,
  kFormat,
  kRegisters,
  kPc,
  kHalted,
  kStopReason,
  kInstrCount,
  kInputsConsumed,
  kOutputs,
  kDirtyPages,
  kChecksum,
};

std::string_view to_string(DigestField field);

struct Comparison {
  bool match = true;
  DigestField first_difference = DigestField::kNone;

  static Comparison matched() { return {}; }
  static Comparison mismatch(DigestField f) { return {false, f}; }
};

Comparison compare(const ExecutionDigest& d1, const ExecutionDigest& d2);

// Compares two serialized digests. An unparsable buffer is a kFormat mismatch.
Comparison compare_buffers(std::span<const std::uint8_t> b1, std::span<const std::uint8_t> b2);

CommitRecord to_commit_record(const ExecutionDigest& d, std::uint64_t seq);

}  // namespace bht

#endif  // BHT_DIGEST_HPP_
