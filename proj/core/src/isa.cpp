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

#include "bht/isa.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

namespace bht {
namespace {

constexpr std::uint32_t kAShift = 21;
constexpr std::uint32_t kBShift = 18;
constexpr std::uint32_t kCShift = 15;
constexpr std::uint32_t kRegMask = 0x7;
constexpr std::uint32_t kImm21Mask = (1u << 21) - 1;
constexpr std::uint32_t kImm15Mask = (1u << 15) - 1;
constexpr std::uint32_t kAddrMask = (1u << 18) - 1;

enum class Format { kRegImm21, kRegReg, kRegRegReg, kRegRegImm15, kAddr, kRegRegAddr, kReg, kNone };

Format format_of(Opcode op) {
  switch (op) {
    case Opcode::kLoadi: return Format::kRegImm21;
    case Opcode::kMov: return Format::kRegReg;
    case Opcode::kAdd:
    case Opcode::kSub:
    case Opcode::kMul:
    case Opcode::kAnd:
    case Opcode::kOr:
    case Opcode::kXor: return Format::kRegRegReg;
    case Opcode::kLoad:
    case Opcode::kStore: return Format::kRegRegImm15;
    case Opcode::kJmp: return Format::kAddr;
    case Opcode::kBeq:
    case Opcode::kBne:
    case Opcode::kBlt: return Format::kRegRegAddr;
    case Opcode::kIn:
    case Opcode::kOut: return Format::kReg;
    case Opcode::kYield:
    case Opcode::kHalt: return Format::kNone;
  }
  return Format::kNone;
}

bool is_opcode(std::uint32_t raw) {
  return raw >= static_cast<std::uint32_t>(Opcode::kLoadi) &&
         raw <= static_cast<std::uint32_t>(Opcode::kHalt);
}

std::int32_t sign_extend(std::uint32_t value, unsigned bits) {
  const std::uint32_t sign = 1u << (bits - 1);
  return static_cast<std::int32_t>((value ^ sign) - sign);
}

void check_reg(std::uint8_t r) {
  if (r >= kRegisterCount) throw std::out_of_range("register index out of range");
}

void check_range(std::int64_t v, std::int64_t lo, std::int64_t hi, const char* what) {
  if (v < lo || v > hi) throw std::out_of_range(std::string(what) + " out of range");
}

}  // namespace

std::string_view mnemonic(Opcode op) {
  switch (op) {
    case Opcode::kLoadi: return "LOADI";
    case Opcode::kMov: return "MOV";
    case Opcode::kAdd: return "ADD";
    case Opcode::kSub: return "SUB";
    case Opcode::kMul: return "MUL";
    case Opcode::kAnd: return "AND";
    case Opcode::kOr: return "OR";
    case Opcode::kXor: return "XOR";
    case Opcode::kLoad: return "LOAD";
    case Opcode::kStore: return "STORE";
    case Opcode::kJmp: return "JMP";
    case Opcode::kBeq: return "BEQ";
    case Opcode::kBne: return "BNE";
    case Opcode::kBlt: return "BLT";
    case Opcode::kIn: return "IN";
    case Opcode::kOut: return "OUT";
    case Opcode::kYield: return "YIELD";
    case Opcode::kHalt: return "HALT";
  }
  return "?";
}

std::optional<Opcode> opcode_from_mnemonic(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  for (Opcode op : kAllOpcodes) {
    if (mnemonic(op) == upper) return op;
  }
  return std::nullopt;
}

std::uint32_t encode(const Instruction& in) {
  std::uint32_t word = static_cast<std::uint32_t>(in.op) << 24;
  switch (format_of(in.op)) {
    case Format::kRegImm21:
      check_reg(in.a);
      check_range(in.imm, kLoadiMin, kLoadiMax, "immediate");
      word |= std::uint32_t{in.a} << kAShift;
      word |= static_cast<std::uint32_t>(in.imm) & kImm21Mask;
      break;
    case Format::kRegReg:
      check_reg(in.a);
      check_reg(in.b);
      word |= std::uint32_t{in.a} << kAShift | std::uint32_t{in.b} << kBShift;
      break;
    case Format::kRegRegReg:
      check_reg(in.a);
      check_reg(in.b);
      check_reg(in.c);
      word |= std::uint32_t{in.a} << kAShift | std::uint32_t{in.b} << kBShift |
              std::uint32_t{in.c} << kCShift;
      break;
    case Format::kRegRegImm15:
      check_reg(in.a);
      check_reg(in.b);
      check_range(in.imm, kOffsetMin, kOffsetMax, "offset");
      word |= std::uint32_t{in.a} << kAShift | std::uint32_t{in.b} << kBShift;
      word |= static_cast<std::uint32_t>(in.imm) & kImm15Mask;
      break;
    case Format::kAddr:
      check_range(in.imm, 0, kAddrMask, "address");
      word |= static_cast<std::uint32_t>(in.imm);
      break;
    case Format::kRegRegAddr:
      check_reg(in.a);
      check_reg(in.b);
      check_range(in.imm, 0, kAddrMask, "address");
      word |= std::uint32_t{in.a} << kAShift | std::uint32_t{in.b} << kBShift;
      word |= static_cast<std::uint32_t>(in.imm);
      break;
    case Format::kReg:
      check_reg(in.a);
      word |= std::uint32_t{in.a} << kAShift;
      break;
    case Format::kNone:
      break;
  }
  return word;
}

std::optional<Instruction> decode(std::uint32_t word) {
  const std::uint32_t raw_op = word >> 24;
  if (!is_opcode(raw_op)) return std::nullopt;

  Instruction in;
  in.op = static_cast<Opcode>(raw_op);
  const std::uint32_t a = (word >> kAShift) & kRegMask;
  const std::uint32_t b = (word >> kBShift) & kRegMask;
  const std::uint32_t c = (word >> kCShift) & kRegMask;
  const std::uint32_t operands = word & 0x00FFFFFFu;

  std::uint32_t used = 0;
  switch (format_of(in.op)) {
    case Format::kRegImm21:
      in.a = static_cast<std::uint8_t>(a);
      in.imm = sign_extend(word & kImm21Mask, 21);
      used = kRegMask << kAShift | kImm21Mask;
      break;
    case Format::kRegReg:
      in.a = static_cast<std::uint8_t>(a);
      in.b = static_cast<std::uint8_t>(b);
      used = kRegMask << kAShift | kRegMask << kBShift;
      break;
    case Format::kRegRegReg:
      in.a = static_cast<std::uint8_t>(a);
      in.b = static_cast<std::uint8_t>(b);
      in.c = static_cast<std::uint8_t>(c);
      used = kRegMask << kAShift | kRegMask << kBShift | kRegMask << kCShift;
      break;
    case Format::kRegRegImm15:
      in.a = static_cast<std::uint8_t>(a);
      in.b = static_cast<std::uint8_t>(b);
      in.imm = sign_extend(word & kImm15Mask, 15);
      used = kRegMask << kAShift | kRegMask << kBShift | kImm15Mask;
      break;
    case Format::kAddr:
      in.imm = static_cast<std::int32_t>(word & kAddrMask);
      used = kAddrMask;
      break;
    case Format::kRegRegAddr:
      in.a = static_cast<std::uint8_t>(a);
      in.b = static_cast<std::uint8_t>(b);
      in.imm = static_cast<std::int32_t>(word & kAddrMask);
      used = kRegMask << kAShift | kRegMask << kBShift | kAddrMask;
      break;
    case Format::kReg:
      in.a = static_cast<std::uint8_t>(a);
      used = kRegMask << kAShift;
      break;
    case Format::kNone:
      break;
  }
  if ((operands & ~used) != 0) return std::nullopt;
  return in;
}

std::string_view to_string(TrapCause cause) {
  switch (cause) {
    case TrapCause::kNone: return "NONE";
    case TrapCause::kDecode: return "DECODE";
    case TrapCause::kOobMemory: return "OOB_MEMORY";
    case TrapCause::kOobJump: return "OOB_JUMP";
    case TrapCause::kInputUnderflow: return "INPUT_UNDERFLOW";
    case TrapCause::kWatchdog: return "WATCHDOG";
  }
  return "?";
}

std::string to_string(StopReason reason) {
  switch (reason.kind) {
    case StopKind::kYield: return "YIELD";
    case StopKind::kHalt: return "HALT";
    case StopKind::kQuantum: return "QUANTUM";
    case StopKind::kTrap: return "TRAP(" + std::string(to_string(reason.cause)) + ")";
  }
  return "?";
}

void ProgramImage::validate() const {
  if (page_count == 0) throw std::invalid_argument("page count must be positive");
  if (code.size() > kMaxCodeWords) {
    throw std::invalid_argument("code length " + std::to_string(code.size()) +
                                " exceeds code space of " + std::to_string(kMaxCodeWords) +
                                " words");
  }
  for (const DataWord& d : initial_data) {
    if (d.page >= page_count || d.offset >= kPageWords) {
      throw std::invalid_argument("data word at page " + std::to_string(d.page) + " offset " +
                                  std::to_string(d.offset) + " is outside memory");
    }
  }
}

std::vector<std::uint32_t> MachineState::dirty_pages() const {
  std::vector<std::uint32_t> ids;
  for (std::uint32_t i = 0; i < dirty.size(); ++i) {
    if (dirty[i]) ids.push_back(i);
  }
  return ids;
}

void MachineState::clear_dirty() { std::fill(dirty.begin(), dirty.end(), 0); }

MachineState initial_state(const ProgramImage& prog) {
  prog.validate();
  MachineState state(prog.page_count);
  for (const auto& d : prog.initial_data) {
    state.memory[std::size_t{d.page} * kPageWords + d.offset] = d.value;
  }
  return state;
}

StepEvent step(MachineState& s, const ProgramImage& prog, IoContext& io) {
  if (s.halted) throw std::logic_error("step on a halted machine");

  auto trap = [&s](TrapCause cause) {
    s.halted = true;
    return StepEvent{StepKind::kTrap, 0, cause};
  };

  ++s.instr_count;
  if (s.pc >= prog.code.size()) return trap(TrapCause::kOobJump);
  const std::optional<Instruction> decoded = decode(prog.code[s.pc]);
  if (!decoded) return trap(TrapCause::kDecode);
  const Instruction& in = *decoded;
  auto& r = s.regs;
  const auto code_size = prog.code.size();

  auto branch = [&](bool taken) {
    const auto target = static_cast<std::uint32_t>(in.imm);
    if (!taken) {
      ++s.pc;
      return StepEvent{};
    }
    if (target >= code_size) return trap(TrapCause::kOobJump);
    s.pc = target;
    return StepEvent{};
  };

  auto address = [&](std::uint8_t base) -> std::optional<std::uint32_t> {
    const std::uint32_t addr = r[base] + static_cast<std::uint32_t>(in.imm);
    if (addr >= s.memory.size()) return std::nullopt;
    return addr;
  };

  switch (in.op) {
    case Opcode::kLoadi: r[in.a] = static_cast<std::uint32_t>(in.imm); break;
    case Opcode::kMov: r[in.a] = r[in.b]; break;
    case Opcode::kAdd: r[in.a] = r[in.b] + r[in.c]; break;
    case Opcode::kSub: r[in.a] = r[in.b] - r[in.c]; break;
    case Opcode::kMul: r[in.a] = r[in.b] * r[in.c]; break;
    case Opcode::kAnd: r[in.a] = r[in.b] & r[in.c]; break;
    case Opcode::kOr: r[in.a] = r[in.b] | r[in.c]; break;
    case Opcode::kXor: r[in.a] = r[in.b] ^ r[in.c]; break;
    case Opcode::kLoad: {
      const auto addr = address(in.b);
      if (!addr) return trap(TrapCause::kOobMemory);
      r[in.a] = s.memory[*addr];
      break;
    }
    case Opcode::kStore: {
      const auto addr = address(in.a);
      if (!addr) return trap(TrapCause::kOobMemory);
      s.memory[*addr] = r[in.b];
      s.mark_dirty(static_cast<std::uint32_t>(*addr / kPageWords));
      break;
    }
    case Opcode::kJmp: return branch(true);
    case Opcode::kBeq: return branch(r[in.a] == r[in.b]);
    case Opcode::kBne: return branch(r[in.a] != r[in.b]);
    case Opcode::kBlt:
      return branch(static_cast<std::int32_t>(r[in.a]) < static_cast<std::int32_t>(r[in.b]));
    case Opcode::kIn: {
      if (io.consumed >= io.inputs.size()) return trap(TrapCause::kInputUnderflow);
      const std::uint32_t v = io.inputs[io.consumed++];
      r[in.a] = v;
      ++s.pc;
      return StepEvent{StepKind::kInputConsumed, v, TrapCause::kNone};
    }
    case Opcode::kOut:
      io.outputs.push_back(r[in.a]);
      ++s.pc;
      return StepEvent{StepKind::kOutput, r[in.a], TrapCause::kNone};
    case Opcode::kYield:
      ++s.pc;
      return StepEvent{StepKind::kYield, 0, TrapCause::kNone};
    case Opcode::kHalt:
      s.halted = true;
      return StepEvent{StepKind::kHalt, 0, TrapCause::kNone};
  }
  ++s.pc;
  return StepEvent{};
}

StopReason run_segment(MachineState& state, const ProgramImage& prog, IoContext& io,
                       std::uint64_t budget) {
  if (budget == 0) throw std::invalid_argument("segment budget must be at least 1");
  for (std::uint64_t executed = 0; executed < budget; ++executed) {
    const StepEvent ev = step(state, prog, io);
    switch (ev.kind) {
      case StepKind::kYield: return StopReason::yield();
      case StepKind::kHalt: return StopReason::halt();
      case StepKind::kTrap: return StopReason::trap(ev.cause);
      default: break;
    }
  }
  return StopReason::quantum();
}

}  // namespace bht
