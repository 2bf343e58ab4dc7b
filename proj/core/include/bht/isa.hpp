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

#ifndef BHT_ISA_HPP_
#define BHT_ISA_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bht {

inline constexpr std::size_t kRegisterCount = 8;
inline constexpr std::size_t kPageWords = 256;
inline constexpr std::uint32_t kDefaultPageCount = 16;
// Largest branch target representable in an encoded instruction.
inline constexpr std::uint32_t kMaxCodeWords = 1u << 18;

// Code word layout (bit 31 on the left):
//   [31:24] opcode  [23:21] a  [20:18] b  [17:15] c  [14:0] low
// Immediate fields overlay unused register fields; see encode().
enum class Opcode : std::uint8_t {
  kLoadi = 0x01,
  kMov = 0x02,
  kAdd = 0x03,
  kSub = 0x04,
  kMul = 0x05,
  kAnd = 0x06,
  kOr = 0x07,
  kXor = 0x08,
  kLoad = 0x09,
  kStore = 0x0A,
  kJmp = 0x0B,
  kBeq = 0x0C,
  kBne = 0x0D,
  kBlt = 0x0E,
  kIn = 0x0F,
  kOut = 0x10,
  kYield = 0x11,
  kHalt = 0x12,
};

inline constexpr std::array kAllOpcodes = {
    Opcode::kLoadi, Opcode::kMov,  Opcode::kAdd,  Opcode::kSub,   Opcode::kMul,
    Opcode::kAnd,   Opcode::kOr,   Opcode::kXor,  Opcode::kLoad,  Opcode::kStore,
    Opcode::kJmp,   Opcode::kBeq,  Opcode::kBne,  Opcode::kBlt,   Opcode::kIn,
    Opcode::kOut,   Opcode::kYield, Opcode::kHalt,
};

// Immediate ranges. LOADI takes a 21-bit signed value, LOAD/STORE a 15-bit
// signed displacement, jumps and branches an 18-bit absolute code address.
inline constexpr std::int32_t kLoadiMin = -(1 << 20);
inline constexpr std::int32_t kLoadiMax = (1 << 20) - 1;
inline constexpr std::int32_t kOffsetMin = -(1 << 14);
inline constexpr std::int32_t kOffsetMax = (1 << 14) - 1;

std::string_view mnemonic(Opcode op);
std::optional<Opcode> opcode_from_mnemonic(std::string_view name);

// Operand roles per opcode:
//   LOADI  a=rd, imm
//   MOV    a=rd, b=rs
//   ALU    a=rd, b=rs1, c=rs2
//   LOAD   a=rd, b=base, imm=offset
//   STORE  a=base, b=rs, imm=offset
//   JMP    imm=target
//   Bxx    a, b, imm=target
//   IN/OUT a
struct Instruction {
  Opcode op = Opcode::kHalt;
  std::uint8_t a = 0;
  std::uint8_t b = 0;
  std::uint8_t c = 0;
  std::int32_t imm = 0;

  bool operator==(const Instruction&) const = default;
};

// Throws std::out_of_range when a register index or immediate does not fit.
std::uint32_t encode(const Instruction& instr);

// Total: every word maps to one instruction or to nullopt (decode trap).
// Unused operand bits must be zero, so decode is injective on accepted words.
std::optional<Instruction> decode(std::uint32_t word);

enum class TrapCause : std::uint8_t {
  kNone = 0,
  kDecode,
  kOobMemory,
  kOobJump,
  kInputUnderflow,
  kWatchdog,
};

std::string_view to_string(TrapCause cause);

enum class StopKind : std::uint8_t { kYield, kHalt, kQuantum, kTrap };

struct StopReason {
  StopKind kind = StopKind::kQuantum;
  TrapCause cause = TrapCause::kNone;

  bool operator==(const StopReason&) const = default;

  static constexpr StopReason yield() { return {StopKind::kYield, TrapCause::kNone}; }
  static constexpr StopReason halt() { return {StopKind::kHalt, TrapCause::kNone}; }
  static constexpr StopReason quantum() { return {StopKind::kQuantum, TrapCause::kNone}; }
  static constexpr StopReason trap(TrapCause c) { return {StopKind::kTrap, c}; }

  // Self-stop: the program itself ended the PE (YIELD or HALT).
  bool self_stop() const { return kind == StopKind::kYield || kind == StopKind::kHalt; }
};

std::string to_string(StopReason reason);

struct ProgramImage {
  struct DataWord {
    std::uint32_t page = 0;
    std::uint32_t offset = 0;
    std::uint32_t value = 0;
    bool operator==(const DataWord&) const = default;
  };

  std::vector<std::uint32_t> code;
  std::vector<DataWord> initial_data;
  std::vector<std::uint32_t> input_queue;
  std::map<std::string, std::uint32_t> labels;
  std::uint32_t page_count = kDefaultPageCount;

  std::size_t memory_words() const { return std::size_t{page_count} * kPageWords; }

  // Throws std::invalid_argument when code or data exceed the machine bounds.
  void validate() const;
};

struct MachineState {
  std::array<std::uint32_t, kRegisterCount> regs{};
  std::uint32_t pc = 0;
  bool halted = false;
  std::vector<std::uint32_t> memory;
  std::vector<std::uint8_t> dirty;  // one flag per page
  std::uint64_t instr_count = 0;

  MachineState() = default;
  explicit MachineState(std::uint32_t page_count)
      : memory(std::size_t{page_count} * kPageWords, 0), dirty(page_count, 0) {}

  std::uint32_t page_count() const { return static_cast<std::uint32_t>(dirty.size()); }
  std::span<const std::uint32_t> page(std::uint32_t id) const {
    return std::span<const std::uint32_t>(memory).subspan(std::size_t{id} * kPageWords, kPageWords);
  }
  void mark_dirty(std::uint32_t page_id) { dirty[page_id] = 1; }
  std::vector<std::uint32_t> dirty_pages() const;
  void clear_dirty();

  bool operator==(const MachineState&) const = default;
};

// Fresh machine state with memory initialised from the image's data section.
MachineState initial_state(const ProgramImage& prog);

// Inputs are latched: the span is fixed for the whole PE and only the cursor
// moves. OUT never reaches an external sink directly.
struct IoContext {
  std::span<const std::uint32_t> inputs;
  std::size_t consumed = 0;
  std::vector<std::uint32_t> outputs;
};

enum class StepKind : std::uint8_t { kNormal, kOutput, kInputConsumed, kYield, kHalt, kTrap };

struct StepEvent {
  StepKind kind = StepKind::kNormal;
  std::uint32_t value = 0;
  TrapCause cause = TrapCause::kNone;

  bool operator==(const StepEvent&) const = default;
};

// Executes exactly one instruction. Traps freeze the machine (halted = true,
// pc left on the offending instruction). Throws std::logic_error if called on
// a halted machine.
StepEvent step(MachineState& state, const ProgramImage& prog, IoContext& io);

// Executes at most `budget` instructions, stopping early on YIELD, HALT or a
// trap. QUANTUM is reported only when the budget ran out first.
StopReason run_segment(MachineState& state, const ProgramImage& prog, IoContext& io,
                       std::uint64_t budget);

}  // namespace bht

#endif  // BHT_ISA_HPP_
