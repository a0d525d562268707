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

#include "flowrnn/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "flowrnn/errors.hpp"

namespace flowrnn {
namespace {

using Magic = std::array<char, 4>;
constexpr Magic kSignalMagic{'F', 'S', 'I', 'G'};
constexpr Magic kSequenceMagic{'F', 'S', 'E', 'Q'};
constexpr Magic kKernelMagic{'F', 'K', 'R', 'N'};
constexpr Magic kModelMagic{'F', 'M', 'D', 'L'};
constexpr std::uint32_t kMaxDim = 1u << 20;

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

void put_u32(std::ostream& os, std::uint32_t v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_values(std::ostream& os, std::span<const double> values) {
  for (double d : values) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(d));
    os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

void put_magic(std::ostream& os, const Magic& m) {
  os.write(m.data(), 4);
  put_u32(os, kContainerVersion);
}

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError("truncated container");
  return to_little(v);
}

std::uint32_t get_dim(std::istream& is, const char* what) {
  const std::uint32_t v = get_u32(is);
  if (v == 0 || v > kMaxDim) {
    throw FormatError(std::string("implausible ") + what + " " + std::to_string(v));
  }
  return v;
}

std::vector<double> get_values(std::istream& is, std::size_t n) {
  std::vector<double> out(n);
  for (double& d : out) {
    std::uint64_t bits = 0;
    if (!is.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
      throw FormatError("truncated container payload");
    }
    d = std::bit_cast<double>(to_little(bits));
  }
  return out;
}

void expect_magic(std::istream& is, const Magic& m) {
  Magic got{};
  if (!is.read(got.data(), 4)) throw FormatError("truncated container header");
  if (got != m) {
    throw FormatError("bad magic '" + std::string(got.data(), 4) + "', expected '" +
                      std::string(m.data(), 4) + "'");
  }
  const std::uint32_t version = get_u32(is);
  if (version != kContainerVersion) {
    throw FormatError("unsupported container version " + std::to_string(version));
  }
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw FormatError("cannot write " + p.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw FormatError("cannot read " + p.string());
  return is;
}

void write_kernel_body(std::ostream& os, const Kernel& k) {
  put_u32(os, static_cast<std::uint32_t>(k.out_channels()));
  put_u32(os, static_cast<std::uint32_t>(k.in_channels()));
  put_u32(os, static_cast<std::uint32_t>(k.rotations()));
  put_u32(os, static_cast<std::uint32_t>(k.kh()));
  put_u32(os, static_cast<std::uint32_t>(k.kw()));
  put_values(os, k.values());
}

}  // namespace

void write_signal(std::ostream& os, const Signal& s) {
  put_magic(os, kSignalMagic);
  put_u32(os, static_cast<std::uint32_t>(s.channels()));
  put_u32(os, static_cast<std::uint32_t>(s.grid().height));
  put_u32(os, static_cast<std::uint32_t>(s.grid().width));
  put_values(os, s.values());
}

Signal read_signal(std::istream& is) {
  expect_magic(is, kSignalMagic);
  const auto k = get_dim(is, "channel count");
  const auto h = get_dim(is, "height");
  const auto w = get_dim(is, "width");
  const Grid grid(static_cast<int>(h), static_cast<int>(w));
  return Signal(grid, static_cast<int>(k), get_values(is, grid.cells() * k));
}

void write_sequence(std::ostream& os, const SpaceTimeSignal& seq) {
  if (seq.empty()) throw InvalidArgument("cannot serialize an empty sequence");
  put_magic(os, kSequenceMagic);
  put_u32(os, static_cast<std::uint32_t>(seq.length()));
  put_u32(os, static_cast<std::uint32_t>(seq.channels()));
  put_u32(os, static_cast<std::uint32_t>(seq.grid().height));
  put_u32(os, static_cast<std::uint32_t>(seq.grid().width));
  for (const auto& f : seq.frames()) put_values(os, f.values());
}

SpaceTimeSignal read_sequence(std::istream& is) {
  expect_magic(is, kSequenceMagic);
  const auto t = get_dim(is, "frame count");
  const auto k = get_dim(is, "channel count");
  const auto h = get_dim(is, "height");
  const auto w = get_dim(is, "width");
  const Grid grid(static_cast<int>(h), static_cast<int>(w));
  SpaceTimeSignal seq;
  for (std::uint32_t i = 0; i < t; ++i) {
    seq.push_back(Signal(grid, static_cast<int>(k), get_values(is, grid.cells() * k)));
  }
  return seq;
}

void write_kernel(std::ostream& os, const Kernel& k) {
  put_magic(os, kKernelMagic);
  write_kernel_body(os, k);
}

Kernel read_kernel(std::istream& is) {
  expect_magic(is, kKernelMagic);
  const auto out = get_dim(is, "output channels");
  const auto in = get_dim(is, "input channels");
  const auto rot = get_dim(is, "rotation axis");
  const auto kh = get_dim(is, "kernel height");
  const auto kw = get_dim(is, "kernel width");
  const std::size_t n = static_cast<std::size_t>(out) * in * rot * kh * kw;
  return Kernel(static_cast<int>(out), static_cast<int>(in), static_cast<int>(kh),
                static_cast<int>(kw), static_cast<int>(rot), get_values(is, n));
}

void write_model(std::ostream& os, const Model& m) {
  nlohmann::json header;
  header["family"] = to_string(m.family);
  header["readout"] = to_string(m.readout);
  header["sigma"] = to_string(m.core.sigma);
  header["lift_mode"] = to_string(m.core.lift_mode);
  header["group"] = m.core.group == GroupKind::translation ? "translation" : "roto_translation";
  header["truncation"] = m.core.truncation == Truncation::drop ? "drop" : "wrap";
  header["flow_set"] = nlohmann::json::parse(flow_set_to_json(*m.core.flow_set));
  header["decoder_layers"] = m.decoder.layers.size();
  header["has_profile"] = m.core.recurrent.v_profile.has_value();
  const std::string text = header.dump();

  put_magic(os, kModelMagic);
  put_u32(os, static_cast<std::uint32_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_kernel(os, m.core.input);
  write_kernel(os, m.core.recurrent.base);
  for (const auto& k : m.decoder.layers) write_kernel(os, k);
  if (m.core.recurrent.v_profile) {
    put_u32(os, static_cast<std::uint32_t>(m.core.recurrent.v_profile->size()));
    put_values(os, *m.core.recurrent.v_profile);
  }
}

Model read_model(std::istream& is) {
  expect_magic(is, kModelMagic);
  const std::uint32_t len = get_u32(is);
  if (len > (1u << 24)) throw FormatError("model header too large");
  std::string text(len, '\0');
  if (!is.read(text.data(), len)) throw FormatError("truncated model header");
  Model m;
  std::size_t layers = 0;
  bool has_profile = false;
  try {
    const auto header = nlohmann::json::parse(text);
    m.family = parse_model_family(header.at("family").get<std::string>());
    m.readout = parse_readout(header.at("readout").get<std::string>());
    m.core.sigma = parse_nonlinearity(header.at("sigma").get<std::string>());
    m.core.lift_mode = parse_lift_mode(header.at("lift_mode").get<std::string>());
    const std::string group = header.at("group").get<std::string>();
    if (group != "translation" && group != "roto_translation") {
      throw FormatError("unknown group '" + group + "'");
    }
    m.core.group = group == "translation" ? GroupKind::translation : GroupKind::roto_translation;
    m.core.truncation =
        header.at("truncation").get<std::string>() == "wrap" ? Truncation::wrap : Truncation::drop;
    m.core.flow_set =
        std::make_shared<const FlowSet>(flow_set_from_json(header.at("flow_set").dump()));
    layers = header.at("decoder_layers").get<std::size_t>();
    has_profile = header.at("has_profile").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad model header: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("bad model header: ") + e.what());
  }
  m.core.input = read_kernel(is);
  Kernel rec = read_kernel(is);
  for (std::size_t l = 0; l < layers; ++l) m.decoder.layers.push_back(read_kernel(is));
  if (has_profile) {
    const std::uint32_t n = get_u32(is);
    if (n != m.core.flow_set->size()) throw FormatError("v_profile length does not match V");
    m.core.recurrent = VKernel::full(std::move(rec), get_values(is, n));
  } else {
    m.core.recurrent = VKernel::delta(std::move(rec));
  }
  return m;
}

void save_signal(const std::filesystem::path& p, const Signal& s) {
  auto os = open_out(p);
  write_signal(os, s);
}

Signal load_signal(const std::filesystem::path& p) {
  auto is = open_in(p);
  return read_signal(is);
}

void save_sequence(const std::filesystem::path& p, const SpaceTimeSignal& seq) {
  auto os = open_out(p);
  write_sequence(os, seq);
}

SpaceTimeSignal load_sequence(const std::filesystem::path& p) {
  auto is = open_in(p);
  return read_sequence(is);
}

void save_model(const std::filesystem::path& p, const Model& m) {
  auto os = open_out(p);
  write_model(os, m);
}

Model load_model(const std::filesystem::path& p) {
  auto is = open_in(p);
  return read_model(is);
}

std::string signal_to_json(const Signal& s) {
  nlohmann::json j;
  j["channels"] = s.channels();
  j["height"] = s.grid().height;
  j["width"] = s.grid().width;
  j["values"] = std::vector<double>(s.values().begin(), s.values().end());
  return j.dump();
}

Signal signal_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    return Signal(Grid(j.at("height").get<int>(), j.at("width").get<int>()),
                  j.at("channels").get<int>(), j.at("values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad signal JSON: ") + e.what());
  }
}

std::string kernel_to_json(const Kernel& k) {
  nlohmann::json j;
  j["out_channels"] = k.out_channels();
  j["in_channels"] = k.in_channels();
  j["rotations"] = k.rotations();
  j["kh"] = k.kh();
  j["kw"] = k.kw();
  j["taps"] = std::vector<double>(k.values().begin(), k.values().end());
  return j.dump();
}

Kernel kernel_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    return Kernel(j.at("out_channels").get<int>(), j.at("in_channels").get<int>(),
                  j.at("kh").get<int>(), j.at("kw").get<int>(), j.at("rotations").get<int>(),
                  j.at("taps").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad kernel JSON: ") + e.what());
  }
}

}  // namespace flowrnn
