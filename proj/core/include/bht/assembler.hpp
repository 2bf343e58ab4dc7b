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

#ifndef BHT_ASSEMBLER_HPP_
#define BHT_ASSEMBLER_HPP_

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bht/isa.hpp"

namespace bht {

class AssemblyError : public std::runtime_error {
 public:
  AssemblyError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Two-pass assembler for the .bhs text format (grammar in docs/assembly.md).
ProgramImage assemble(std::string_view source);
ProgramImage assemble_file(const std::filesystem::path& path);

// Canonical text: numeric branch targets, `.word` for undecodable words,
// then `.data` and `.input` directives. Labels are not reproduced.
std::string disassemble(const ProgramImage& image);

std::string disassemble_word(std::uint32_t word);

}  // namespace bht

#endif  // BHT_ASSEMBLER_HPP_
