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

#include "bht/generator.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <vector>

namespace bht {
namespace {

// R0..R5 carry data, R6 is the loop counter, R7 is scratch.
constexpr std::uint32_t kDataRegs = 6;

class Generator {
 public:
  Generator(std::uint64_t seed, const GeneratorOptions& opt) : rng_(seed), seed_(seed), opt_(opt) {
    const std::uint32_t words = opt.page_count * static_cast<std::uint32_t>(kPageWords);
    if (opt.page_count == 0 || (words & (words - 1)) != 0) {
      throw std::invalid_argument("generator needs a power-of-two memory size");
    }
    mask_ = words - 1;
  }

  std::string run() {
    char header[128];
    std::snprintf(header, sizeof header, "; generated seed=%llu size=%u density=%.3f\n",
                  static_cast<unsigned long long>(seed_), opt_.size, opt_.yield_density);
    text_ = header;
    if (opt_.page_count != kDefaultPageCount) {
      text_ += ".pages " + std::to_string(opt_.page_count) + "\n";
    }

    for (int i = 0; i < 4; ++i) {
      text_ += ".data " + std::to_string(below(opt_.page_count)) + " " +
               std::to_string(below(kPageWords)) + " " + std::to_string(below(1000)) + "\n";
    }
    const std::uint32_t budget = opt_.size - 1;
    while (emitted_ < budget) top_level_unit(budget - emitted_);
    flush_labels(true);
    line("HALT");
    for (std::uint32_t i = 0; i < inputs_; ++i) {
      text_ += ".input " + std::to_string(below(100000)) + "\n";
    }
    return text_;
  }

 private:
  std::uint32_t below(std::uint64_t n) { return static_cast<std::uint32_t>(rng_() % n); }
  bool chance(double p) { return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < p; }
  std::string data_reg() { return "R" + std::to_string(below(kDataRegs)); }

  void line(const std::string& s) {
    text_ += "  " + s + "\n";
    ++emitted_;
  }

  // Emits at most `room` instructions; returns how many.
  std::uint32_t simple_unit(std::uint32_t room, bool in_loop) {
    if (room >= 1 && chance(opt_.yield_density)) {
      line("YIELD");
      return 1;
    }
    const std::uint32_t pick = below(in_loop ? 9 : 10);
    if (room >= 3 && pick < 2) {
      line("LOADI R7, " + std::to_string(mask_));
      line("AND R7, " + data_reg() + ", R7");
      if (pick == 0) {
        line("STORE [R7+0], " + data_reg());
      } else {
        line("LOAD " + data_reg() + ", [R7+0]");
      }
      return 3;
    }
    if (pick == 2) {
      line("LOADI " + data_reg() + ", " + std::to_string(static_cast<int>(below(2001)) - 1000));
    } else if (pick == 3) {
      line("OUT " + data_reg());
    } else if (pick == 9) {
      line("IN " + data_reg());
      ++inputs_;
    } else {
      static constexpr const char* kAlu[] = {"ADD", "SUB", "MUL", "AND", "OR", "XOR", "MOV"};
      const char* op = kAlu[below(7)];
      if (std::string(op) == "MOV") {
        line(std::string("MOV ") + data_reg() + ", " + data_reg());
      } else {
        line(std::string(op) + " " + data_reg() + ", " + data_reg() + ", " + data_reg());
      }
    }
    return 1;
  }

  void top_level_unit(std::uint32_t room) {
    const std::uint32_t pick = below(10);
    if (opt_.loops && pick == 0 && room >= 6) {
      loop(room);
    } else if (pick == 1 && room >= 2) {
      const std::string label = "L" + std::to_string(next_label_++);
      static constexpr const char* kBranch[] = {"BEQ", "BNE", "BLT"};
      line(std::string(kBranch[below(3)]) + " " + data_reg() + ", " + data_reg() + ", " + label);
      pending_.push_back({label, 1 + below(3)});
    } else {
      simple_unit(room, false);
    }
    flush_labels(false);
  }

  void loop(std::uint32_t room) {
    const std::string label = "L" + std::to_string(next_label_++);
    const std::uint32_t trips = 2 + below(kMaxLoopTrips - 1);
    const std::uint32_t body_room = std::min<std::uint32_t>(room - 5, 1 + below(8));
    line("LOADI R6, " + std::to_string(trips));
    text_ += label + ":\n";
    std::uint32_t used = 0;
    while (used < body_room) used += simple_unit(body_room - used, true);
    line("LOADI R7, 1");
    line("SUB R6, R6, R7");
    line("LOADI R7, 0");
    line("BNE R6, R7, " + label);
  }

  // Forward-branch targets land between top-level units only, never inside
  // a loop body.
  void flush_labels(bool all) {
    std::vector<Pending> keep;
    for (Pending& p : pending_) {
      if (all || --p.units_left == 0) {
        text_ += p.label + ":\n";
      } else {
        keep.push_back(p);
      }
    }
    pending_ = std::move(keep);
  }

  struct Pending {
    std::string label;
    std::uint32_t units_left;
  };

  std::mt19937_64 rng_;
  std::uint64_t seed_ = 0;
  GeneratorOptions opt_;
  std::uint32_t mask_ = 0;
  std::uint32_t emitted_ = 0;
  std::uint32_t inputs_ = 0;
  std::uint32_t next_label_ = 0;
  std::vector<Pending> pending_;
  std::string text_;
};

}  // namespace

std::string gen_program(std::uint64_t seed, const GeneratorOptions& options) {
  if (options.size == 0) throw std::invalid_argument("program size must be at least 1");
  if (options.size == 1) return "HALT\n";
  return Generator(seed, options).run();
}

std::string gen_program(std::uint64_t seed, std::uint32_t size, double yield_density) {
  GeneratorOptions opt;
  opt.size = size;
  opt.yield_density = yield_density;
  return gen_program(seed, opt);
}

}  // namespace bht
