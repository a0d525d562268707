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

#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "flowrnn/errors.hpp"
#include "support/oracle.hpp"

namespace flowrnn {
namespace {

using testing::Rng;

TEST(SignalIoTest, BinaryRoundTripIsExact) {
  Rng rng(1);
  const Signal s = testing::random_signal(rng, Grid(3, 5), 2);
  std::stringstream buf;
  write_signal(buf, s);
  EXPECT_EQ(buf.str().size(), 4u + 4u * 4u + 30u * 8u);
  EXPECT_EQ(buf.str().substr(0, 4), "FSIG");
  EXPECT_EQ(read_signal(buf), s);
}

TEST(SignalIoTest, HeaderIsLittleEndian) {
  std::stringstream buf;
  write_signal(buf, Signal(Grid(2, 3), 1));
  const std::string bytes = buf.str();
  const unsigned char version[4] = {1, 0, 0, 0};
  EXPECT_EQ(std::memcmp(bytes.data() + 4, version, 4), 0);
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 2u);  // H
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 3u);  // W
}

TEST(SignalIoTest, RejectsBadMagicVersionAndTruncation) {
  std::stringstream good;
  write_signal(good, Signal(Grid(2, 2), 1));
  std::string bytes = good.str();

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::istringstream a(bad_magic);
  EXPECT_THROW(read_signal(a), FormatError);

  std::string bad_version = bytes;
  bad_version[4] = 9;
  std::istringstream b(bad_version);
  EXPECT_THROW(read_signal(b), FormatError);

  std::istringstream c(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_signal(c), FormatError);

  std::istringstream d(bytes);
  EXPECT_THROW(read_sequence(d), FormatError);
}

TEST(SequenceIoTest, BinaryRoundTripIsExact) {
  Rng rng(2);
  const auto seq = testing::random_sequence(rng, Grid(4, 4), 1, 3);
  std::stringstream buf;
  write_sequence(buf, seq);
  EXPECT_EQ(buf.str().substr(0, 4), "FSEQ");
  EXPECT_EQ(read_sequence(buf), seq);
}

TEST(KernelIoTest, BinaryAndJsonRoundTrips) {
  Rng rng(3);
  const Kernel k = testing::random_kernel(rng, 2, 3, 3, 5, 4);
  std::stringstream buf;
  write_kernel(buf, k);
  EXPECT_EQ(buf.str().substr(0, 4), "FKRN");
  EXPECT_EQ(read_kernel(buf), k);
  EXPECT_EQ(kernel_from_json(kernel_to_json(k)), k);
  EXPECT_THROW(kernel_from_json("[1,2]"), FormatError);
}

TEST(SignalJsonTest, RoundTripIsLossless) {
  Rng rng(4);
  const Signal s = testing::random_signal(rng, Grid(2, 3), 2);
  EXPECT_EQ(signal_from_json(signal_to_json(s)), s);
  EXPECT_THROW(signal_from_json("{\"K\":1}"), FormatError);
}

TEST(ModelIoTest, RoundTripPreservesEverything) {
  for (bool full : {false, true}) {
    ModelSpec spec;
    spec.flow_set = std::make_shared<const FlowSet>(build_rotation_flow_set(1));
    spec.group = GroupKind::roto_translation;
    spec.hidden_channels = 2;
    spec.full_profile = full;
    spec.lift_mode = LiftMode::nontrivial;
    spec.readout = Readout::current;
    spec.sigma = Nonlinearity::tanh;
    spec.truncation = Truncation::wrap;
    const Model m = init_model(spec, 5);
    std::stringstream buf;
    write_model(buf, m);
    EXPECT_EQ(buf.str().substr(0, 4), "FMDL");
    const Model back = read_model(buf);
    EXPECT_EQ(back.family, m.family);
    EXPECT_EQ(back.readout, m.readout);
    EXPECT_EQ(back.core.sigma, m.core.sigma);
    EXPECT_EQ(back.core.lift_mode, m.core.lift_mode);
    EXPECT_EQ(back.core.group, m.core.group);
    EXPECT_EQ(back.core.truncation, m.core.truncation);
    EXPECT_EQ(*back.core.flow_set, *m.core.flow_set);
    EXPECT_EQ(back.core.input, m.core.input);
    EXPECT_EQ(back.core.recurrent.base, m.core.recurrent.base);
    EXPECT_EQ(back.core.recurrent.v_profile, m.core.recurrent.v_profile);
    EXPECT_EQ(back.decoder.layers, m.decoder.layers);
  }
}

TEST(ModelIoTest, GrnnRoundTrip) {
  ModelSpec spec;
  spec.family = ModelFamily::grnn;
  const Model m = init_model(spec, 6);
  std::stringstream buf;
  write_model(buf, m);
  const Model back = read_model(buf);
  EXPECT_EQ(back.family, ModelFamily::grnn);
  EXPECT_EQ(back.parameter_count(), m.parameter_count());
}

TEST(ModelIoTest, MissingFileThrows) {
  EXPECT_THROW(load_model("/nonexistent/flowrnn/model.fmdl"), FormatError);
  EXPECT_THROW(load_signal("/nonexistent/flowrnn/x.fsig"), FormatError);
}

}  // namespace
}  // namespace flowrnn
