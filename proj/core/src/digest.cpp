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

#include "bht/digest.hpp"

namespace bht {
namespace {

constexpr std::uint32_t kMagic = 0x42485444;  // "BHTD"

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }
  void reserve(std::size_t n) { out_.reserve(n); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  bool u8(std::uint8_t& v) {
    if (pos_ + 1 > in_.size()) return false;
    v = in_[pos_++];
    return true;
  }
  bool u32(std::uint32_t& v) {
    if (pos_ + 4 > in_.size()) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_++]} << (8 * i);
    return true;
  }
  bool u64(std::uint64_t& v) {
    if (pos_ + 8 > in_.size()) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_++]} << (8 * i);
    return true;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void hash_stop(Fnv1a& h, StopReason r) {
  h.add_byte(static_cast<std::uint8_t>(r.kind));
  h.add_byte(static_cast<std::uint8_t>(r.cause));
}

}  // namespace

ExecutionDigest make_digest(const MachineState& state, const IoContext& io, StopReason stop) {
  ExecutionDigest d;
  d.regs = state.regs;
  d.pc = state.pc;
  d.halted = state.halted;
  for (std::uint32_t id : state.dirty_pages()) {
    PageImage p;
    p.id = id;
    const auto src = state.page(id);
    std::copy(src.begin(), src.end(), p.words.begin());
    d.dirty_pages.push_back(p);
  }
  d.outputs = io.outputs;
  d.inputs_consumed = io.consumed;
  d.stop_reason = stop;
  d.instr_count = state.instr_count;
  d.checksum = content_checksum(d);
  return d;
}

std::uint64_t content_checksum(const ExecutionDigest& d) {
  Fnv1a h;
  h.add_words(d.regs);
  h.add_u32(d.pc);
  h.add_byte(d.halted ? 1 : 0);
  hash_stop(h, d.stop_reason);
  h.add_u64(d.instr_count);
  h.add_u64(d.inputs_consumed);
  h.add_u64(d.outputs.size());
  h.add_words(d.outputs);
  h.add_u64(d.dirty_pages.size());
  for (const PageImage& p : d.dirty_pages) {
    h.add_u32(p.id);
    h.add_words(p.words);
  }
  return h.value();
}

std::vector<std::uint8_t> serialize(const ExecutionDigest& d) {
  Writer w;
  w.reserve(96 + d.outputs.size() * 4 + d.dirty_pages.size() * (4 + kPageWords * 4));
  w.u32(kMagic);
  for (std::uint32_t r : d.regs) w.u32(r);
  w.u32(d.pc);
  w.u8(d.halted ? 1 : 0);
  w.u8(static_cast<std::uint8_t>(d.stop_reason.kind));
  w.u8(static_cast<std::uint8_t>(d.stop_reason.cause));
  w.u64(d.instr_count);
  w.u64(d.inputs_consumed);
  w.u32(static_cast<std::uint32_t>(d.outputs.size()));
  for (std::uint32_t v : d.outputs) w.u32(v);
  w.u32(static_cast<std::uint32_t>(d.dirty_pages.size()));
  for (const PageImage& p : d.dirty_pages) {
    w.u32(p.id);
    for (std::uint32_t v : p.words) w.u32(v);
  }
  w.u64(d.checksum);
  return w.take();
}

std::optional<ExecutionDigest> deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  ExecutionDigest d;
  std::uint32_t magic = 0;
  if (!r.u32(magic) || magic != kMagic) return std::nullopt;
  for (std::uint32_t& reg : d.regs) {
    if (!r.u32(reg)) return std::nullopt;
  }
  std::uint8_t halted = 0, kind = 0, cause = 0;
  if (!r.u32(d.pc) || !r.u8(halted) || !r.u8(kind) || !r.u8(cause)) return std::nullopt;
  if (halted > 1 || kind > static_cast<std::uint8_t>(StopKind::kTrap) ||
      cause > static_cast<std::uint8_t>(TrapCause::kWatchdog)) {
    return std::nullopt;
  }
  d.halted = halted == 1;
  d.stop_reason = {static_cast<StopKind>(kind), static_cast<TrapCause>(cause)};
  if (!r.u64(d.instr_count) || !r.u64(d.inputs_consumed)) return std::nullopt;

  std::uint32_t n_out = 0;
  if (!r.u32(n_out) || std::size_t{n_out} * 4 > r.remaining()) return std::nullopt;
  d.outputs.resize(n_out);
  for (std::uint32_t& v : d.outputs) r.u32(v);

  std::uint32_t n_pages = 0;
  if (!r.u32(n_pages) || std::size_t{n_pages} * (4 + kPageWords * 4) > r.remaining()) {
    return std::nullopt;
  }
  d.dirty_pages.resize(n_pages);
  for (PageImage& p : d.dirty_pages) {
    r.u32(p.id);
    for (std::uint32_t& v : p.words) r.u32(v);
  }
  if (!r.u64(d.checksum) || r.remaining() != 0) return std::nullopt;
  return d;
}

std::string_view to_string(DigestField field) {
  switch (field) {
    case DigestField::kNone: return "none";
    case DigestField::kFormat: return "format";
    case DigestField::kRegisters: return "regs";
    case DigestField::kPc: return "pc";
    case DigestField::kHalted: return "halted";
    case DigestField::kStopReason: return "stop_reason";
    case DigestField::kInstrCount: return "instr_count";
    case DigestField::kInputsConsumed: return "inputs_consumed";
    case DigestField::kOutputs: return "outputs";
    case DigestField::kDirtyPages: return "dirty_pages";
    case DigestField::kChecksum: return "checksum";
  }
  return "?";
}

Comparison compare(const ExecutionDigest& a, const ExecutionDigest& b) {
  if (a.regs != b.regs) return Comparison::mismatch(DigestField::kRegisters);
  if (a.pc != b.pc) return Comparison::mismatch(DigestField::kPc);
  if (a.halted != b.halted) return Comparison::mismatch(DigestField::kHalted);
  if (a.stop_reason != b.stop_reason) return Comparison::mismatch(DigestField::kStopReason);
  if (a.instr_count != b.instr_count) return Comparison::mismatch(DigestField::kInstrCount);
  if (a.inputs_consumed != b.inputs_consumed) {
    return Comparison::mismatch(DigestField::kInputsConsumed);
  }
  if (a.outputs != b.outputs) return Comparison::mismatch(DigestField::kOutputs);
  if (a.dirty_pages != b.dirty_pages) return Comparison::mismatch(DigestField::kDirtyPages);
  if (a.checksum != b.checksum) return Comparison::mismatch(DigestField::kChecksum);
  return Comparison::matched();
}

Comparison compare_buffers(std::span<const std::uint8_t> b1, std::span<const std::uint8_t> b2) {
  const auto d1 = deserialize(b1);
  const auto d2 = deserialize(b2);
  if (!d1 || !d2) return Comparison::mismatch(DigestField::kFormat);
  return compare(*d1, *d2);
}

CommitRecord to_commit_record(const ExecutionDigest& d, std::uint64_t seq) {
  CommitRecord rec;
  rec.seq = seq;
  rec.pages = d.dirty_pages;
  rec.regs = d.regs;
  rec.pc = d.pc;
  rec.halted = d.halted;
  rec.inputs_consumed = d.inputs_consumed;
  rec.outputs = d.outputs;
  rec.stop_reason = d.stop_reason;
  return rec;
}

}  // namespace bht
