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

#include "bht/assembler.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

namespace bht {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_' || s[0] == '.')) return false;
  for (char ch : s) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.')) return false;
  }
  return true;
}

std::optional<std::int64_t> parse_number(std::string_view s) {
  s = trim(s);
  bool negative = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    negative = s[0] == '-';
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  if (s.empty()) return std::nullopt;
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, base);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  if (value > (std::uint64_t{1} << 33)) return std::nullopt;
  const auto v = static_cast<std::int64_t>(value);
  return negative ? -v : v;
}

std::vector<std::string_view> split_operands(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

// A pending code word: either fully encoded or waiting on a label.
struct PendingWord {
  std::size_t line = 0;
  Instruction instr;
  std::string label;  // non-empty: resolve into instr.imm in pass two
  std::optional<std::uint32_t> raw;
};

class Parser {
 public:
  ProgramImage run(std::string_view source) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= source.size()) {
      const std::size_t eol = source.find('\n', pos);
      const std::string_view line =
          source.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
      ++line_no;
      parse_line(line_no, line);
      if (eol == std::string_view::npos) break;
      pos = eol + 1;
    }
    return finish();
  }

 private:
  void parse_line(std::size_t line_no, std::string_view line) {
    if (const auto semi = line.find(';'); semi != std::string_view::npos) line = line.substr(0, semi);
    line = trim(line);
    while (!line.empty()) {
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) break;
      const std::string_view name = trim(line.substr(0, colon));
      if (!is_identifier(name) || name[0] == '.') break;
      define_label(line_no, std::string(name));
      line = trim(line.substr(colon + 1));
    }
    if (line.empty()) return;

    std::size_t split = 0;
    while (split < line.size() && !std::isspace(static_cast<unsigned char>(line[split]))) ++split;
    const std::string_view head = line.substr(0, split);
    const std::string_view rest = trim(line.substr(split));

    if (head[0] == '.') {
      parse_directive(line_no, head, rest);
      return;
    }
    const auto op = opcode_from_mnemonic(head);
    if (!op) throw AssemblyError(line_no, "unknown mnemonic '" + std::string(head) + "'");
    parse_instruction(line_no, *op, split_operands(rest));
  }

  void define_label(std::size_t line_no, std::string name) {
    if (image_.labels.contains(name)) {
      throw AssemblyError(line_no, "duplicate label '" + name + "'");
    }
    image_.labels.emplace(std::move(name), static_cast<std::uint32_t>(words_.size()));
  }

  std::vector<std::int64_t> numbers(std::size_t line_no, std::string_view rest, std::size_t count,
                                    std::string_view directive) {
    std::vector<std::int64_t> out;
    std::istringstream in{std::string(rest)};
    std::string tok;
    while (in >> tok) {
      const auto v = parse_number(tok);
      if (!v) throw AssemblyError(line_no, "bad number '" + tok + "'");
      out.push_back(*v);
    }
    if (out.size() != count) {
      throw AssemblyError(line_no, std::string(directive) + " expects " + std::to_string(count) +
                                       " operand(s)");
    }
    return out;
  }

  static std::uint32_t as_word(std::size_t line_no, std::int64_t v) {
    if (v < -(std::int64_t{1} << 31) || v > 0xFFFFFFFFll) {
      throw AssemblyError(line_no, "value does not fit in 32 bits");
    }
    return static_cast<std::uint32_t>(v);
  }

  void parse_directive(std::size_t line_no, std::string_view head, std::string_view rest) {
    if (head == ".data") {
      const auto v = numbers(line_no, rest, 3, head);
      if (v[0] < 0 || v[1] < 0 || v[1] >= static_cast<std::int64_t>(kPageWords)) {
        throw AssemblyError(line_no, ".data target out of range");
      }
      data_lines_.push_back(line_no);
      image_.initial_data.push_back({static_cast<std::uint32_t>(v[0]),
                                     static_cast<std::uint32_t>(v[1]), as_word(line_no, v[2])});
    } else if (head == ".input") {
      const auto v = numbers(line_no, rest, 1, head);
      image_.input_queue.push_back(as_word(line_no, v[0]));
    } else if (head == ".word") {
      const auto v = numbers(line_no, rest, 1, head);
      PendingWord w;
      w.line = line_no;
      w.raw = as_word(line_no, v[0]);
      words_.push_back(w);
    } else if (head == ".pages") {
      const auto v = numbers(line_no, rest, 1, head);
      if (v[0] < 1 || v[0] > 65536) throw AssemblyError(line_no, ".pages out of range");
      image_.page_count = static_cast<std::uint32_t>(v[0]);
    } else {
      throw AssemblyError(line_no, "unknown directive '" + std::string(head) + "'");
    }
  }

  static std::uint8_t reg(std::size_t line_no, std::string_view tok) {
    tok = trim(tok);
    if (tok.size() == 2 && (tok[0] == 'R' || tok[0] == 'r') && tok[1] >= '0' && tok[1] <= '7') {
      return static_cast<std::uint8_t>(tok[1] - '0');
    }
    throw AssemblyError(line_no, "expected register R0..R7, got '" + std::string(tok) + "'");
  }

  // [Rn], [Rn+imm], [Rn-imm]
  static std::pair<std::uint8_t, std::int64_t> mem_operand(std::size_t line_no,
                                                           std::string_view tok) {
    tok = trim(tok);
    if (tok.size() < 4 || tok.front() != '[' || tok.back() != ']') {
      throw AssemblyError(line_no, "expected memory operand [Rn+imm], got '" + std::string(tok) + "'");
    }
    tok = trim(tok.substr(1, tok.size() - 2));
    const auto sign = tok.find_first_of("+-");
    if (sign == std::string_view::npos) return {reg(line_no, tok), 0};
    const std::uint8_t base = reg(line_no, tok.substr(0, sign));
    const auto off = parse_number(tok.substr(sign));
    if (!off) throw AssemblyError(line_no, "bad memory offset");
    return {base, *off};
  }

  static void expect(std::size_t line_no, Opcode op, const std::vector<std::string_view>& ops,
                     std::size_t n) {
    if (ops.size() != n) {
      throw AssemblyError(line_no, std::string(mnemonic(op)) + " expects " + std::to_string(n) +
                                       " operand(s), got " + std::to_string(ops.size()));
    }
  }

  static std::int32_t checked(std::size_t line_no, std::int64_t v, std::int64_t lo,
                              std::int64_t hi) {
    if (v < lo || v > hi) {
      throw AssemblyError(line_no, "immediate " + std::to_string(v) + " out of range [" +
                                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<std::int32_t>(v);
  }

  void target(std::size_t line_no, std::string_view tok, PendingWord& w) {
    tok = trim(tok);
    if (const auto v = parse_number(tok)) {
      w.instr.imm = checked(line_no, *v, 0, kMaxCodeWords - 1);
    } else if (is_identifier(tok)) {
      w.label = std::string(tok);
    } else {
      throw AssemblyError(line_no, "bad branch target '" + std::string(tok) + "'");
    }
  }

  void parse_instruction(std::size_t line_no, Opcode op, const std::vector<std::string_view>& ops) {
    PendingWord w;
    w.line = line_no;
    w.instr.op = op;
    Instruction& in = w.instr;
    switch (op) {
      case Opcode::kLoadi: {
        expect(line_no, op, ops, 2);
        in.a = reg(line_no, ops[0]);
        const auto v = parse_number(ops[1]);
        if (!v) throw AssemblyError(line_no, "bad immediate '" + std::string(ops[1]) + "'");
        in.imm = checked(line_no, *v, kLoadiMin, kLoadiMax);
        break;
      }
      case Opcode::kMov:
        expect(line_no, op, ops, 2);
        in.a = reg(line_no, ops[0]);
        in.b = reg(line_no, ops[1]);
        break;
      case Opcode::kAdd:
      case Opcode::kSub:
      case Opcode::kMul:
      case Opcode::kAnd:
      case Opcode::kOr:
      case Opcode::kXor:
        expect(line_no, op, ops, 3);
        in.a = reg(line_no, ops[0]);
        in.b = reg(line_no, ops[1]);
        in.c = reg(line_no, ops[2]);
        break;
      case Opcode::kLoad: {
        expect(line_no, op, ops, 2);
        in.a = reg(line_no, ops[0]);
        const auto [base, off] = mem_operand(line_no, ops[1]);
        in.b = base;
        in.imm = checked(line_no, off, kOffsetMin, kOffsetMax);
        break;
      }
      case Opcode::kStore: {
        expect(line_no, op, ops, 2);
        const auto [base, off] = mem_operand(line_no, ops[0]);
        in.a = base;
        in.b = reg(line_no, ops[1]);
        in.imm = checked(line_no, off, kOffsetMin, kOffsetMax);
        break;
      }
      case Opcode::kJmp:
        expect(line_no, op, ops, 1);
        target(line_no, ops[0], w);
        break;
      case Opcode::kBeq:
      case Opcode::kBne:
      case Opcode::kBlt:
        expect(line_no, op, ops, 3);
        in.a = reg(line_no, ops[0]);
        in.b = reg(line_no, ops[1]);
        target(line_no, ops[2], w);
        break;
      case Opcode::kIn:
      case Opcode::kOut:
        expect(line_no, op, ops, 1);
        in.a = reg(line_no, ops[0]);
        break;
      case Opcode::kYield:
      case Opcode::kHalt:
        expect(line_no, op, ops, 0);
        break;
    }
    words_.push_back(std::move(w));
  }

  ProgramImage finish() {
    image_.code.reserve(words_.size());
    for (PendingWord& w : words_) {
      if (w.raw) {
        image_.code.push_back(*w.raw);
        continue;
      }
      if (!w.label.empty()) {
        const auto it = image_.labels.find(w.label);
        if (it == image_.labels.end()) {
          throw AssemblyError(w.line, "undefined label '" + w.label + "'");
        }
        w.instr.imm = static_cast<std::int32_t>(it->second);
      }
      image_.code.push_back(encode(w.instr));
    }
    if (image_.code.size() > kMaxCodeWords) {
      throw AssemblyError(words_.back().line, "program exceeds code space");
    }
    for (std::size_t i = 0; i < image_.initial_data.size(); ++i) {
      if (image_.initial_data[i].page >= image_.page_count) {
        throw AssemblyError(data_lines_[i], ".data page " +
                                                std::to_string(image_.initial_data[i].page) +
                                                " outside " + std::to_string(image_.page_count) +
                                                " configured pages");
      }
    }
    return std::move(image_);
  }

  ProgramImage image_;
  std::vector<PendingWord> words_;
  std::vector<std::size_t> data_lines_;
};

std::string hex_word(std::uint32_t w) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", w);
  return buf;
}

}  // namespace

ProgramImage assemble(std::string_view source) { return Parser{}.run(source); }

ProgramImage assemble_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return assemble(buf.str());
}

std::string disassemble_word(std::uint32_t word) {
  const auto decoded = decode(word);
  if (!decoded) return ".word " + hex_word(word);
  const Instruction& in = *decoded;
  std::string out(mnemonic(in.op));
  auto r = [](std::uint8_t i) { return "R" + std::to_string(i); };
  auto mem = [&r](std::uint8_t base, std::int32_t off) {
    std::string m = "[" + r(base);
    if (off != 0) m += (off < 0 ? "-" : "+") + std::to_string(off < 0 ? -off : off);
    return m + "]";
  };
  switch (in.op) {
    case Opcode::kLoadi: out += " " + r(in.a) + ", " + std::to_string(in.imm); break;
    case Opcode::kMov: out += " " + r(in.a) + ", " + r(in.b); break;
    case Opcode::kAdd:
    case Opcode::kSub:
    case Opcode::kMul:
    case Opcode::kAnd:
    case Opcode::kOr:
    case Opcode::kXor: out += " " + r(in.a) + ", " + r(in.b) + ", " + r(in.c); break;
    case Opcode::kLoad: out += " " + r(in.a) + ", " + mem(in.b, in.imm); break;
    case Opcode::kStore: out += " " + mem(in.a, in.imm) + ", " + r(in.b); break;
    case Opcode::kJmp: out += " " + std::to_string(in.imm); break;
    case Opcode::kBeq:
    case Opcode::kBne:
    case Opcode::kBlt:
      out += " " + r(in.a) + ", " + r(in.b) + ", " + std::to_string(in.imm);
      break;
    case Opcode::kIn:
    case Opcode::kOut: out += " " + r(in.a); break;
    case Opcode::kYield:
    case Opcode::kHalt: break;
  }
  return out;
}

std::string disassemble(const ProgramImage& image) {
  std::string out;
  if (image.page_count != kDefaultPageCount) {
    out += ".pages " + std::to_string(image.page_count) + "\n";
  }
  for (std::uint32_t w : image.code) out += disassemble_word(w) + "\n";
  for (const auto& d : image.initial_data) {
    out += ".data " + std::to_string(d.page) + " " + std::to_string(d.offset) + " " +
           std::to_string(d.value) + "\n";
  }
  for (std::uint32_t v : image.input_queue) out += ".input " + std::to_string(v) + "\n";
  return out;
}

}  // namespace bht
