// Copyright 2026 The flowrnn Authors
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

#ifndef FLOWRNN_IO_HPP_
#define FLOWRNN_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>

#include "flowrnn/conv.hpp"
#include "flowrnn/grid_signal.hpp"
#include "flowrnn/rnn.hpp"

// Binary containers. All integers are u32 and all values float64, both
// little-endian. Each container starts with a 4-byte magic and a u32 version.
//   FSIG  K H W, then K·H·W values
//   FSEQ  T K H W, then T·K·H·W values
//   FKRN  out in rotations kh kw, then the taps
//   FMDL  u32 byte length of a JSON header, the header, then one FKRN block
//         per kernel and (if present) u32 |V| plus the v_profile values
namespace flowrnn {

inline constexpr unsigned kContainerVersion = 1;

void write_signal(std::ostream& os, const Signal& s);
Signal read_signal(std::istream& is);
void write_sequence(std::ostream& os, const SpaceTimeSignal& seq);
SpaceTimeSignal read_sequence(std::istream& is);
void write_kernel(std::ostream& os, const Kernel& k);
Kernel read_kernel(std::istream& is);
void write_model(std::ostream& os, const Model& m);
Model read_model(std::istream& is);

// Path conveniences; throw FormatError when the file cannot be opened.
void save_signal(const std::filesystem::path& p, const Signal& s);
Signal load_signal(const std::filesystem::path& p);
void save_sequence(const std::filesystem::path& p, const SpaceTimeSignal& seq);
SpaceTimeSignal load_sequence(const std::filesystem::path& p);
void save_model(const std::filesystem::path& p, const Model& m);
Model load_model(const std::filesystem::path& p);

// Lossless JSON debug forms (doubles printed with round-trip precision).
std::string signal_to_json(const Signal& s);
Signal signal_from_json(const std::string& text);
std::string kernel_to_json(const Kernel& k);
Kernel kernel_from_json(const std::string& text);

}  // namespace flowrnn

#endif  // FLOWRNN_IO_HPP_
