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

#ifndef FLOWRNN_DATA_HPP_
#define FLOWRNN_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "flowrnn/grid_signal.hpp"
#include "flowrnn/group_flow.hpp"

namespace flowrnn {

enum class SpriteKind { gaussian, glyph, mixed };
SpriteKind parse_sprite_kind(const std::string& s);
std::string to_string(SpriteKind k);

/// Small single-channel patterns with values in [0, 1], none all-zero.
class SpriteBank {
 public:
  SpriteBank() = default;
  /// Throws InvalidArgument if a sprite is empty, zero or outside [0, 1].
  explicit SpriteBank(std::vector<Signal> sprites);

  static SpriteBank generate(int count, int size, SpriteKind kind, std::uint64_t seed);

  std::size_t size() const { return sprites_.size(); }
  const Signal& operator[](std::size_t i) const { return sprites_[i]; }
  const std::vector<Signal>& sprites() const { return sprites_; }

 private:
  std::vector<Signal> sprites_;
};

enum class Split { train, val, test };
std::string to_string(Split s);
Split parse_split(const std::string& s);

struct FlowDatasetConfig {
  Grid grid{16, 16};
  int length = 12;
  std::shared_ptr<const FlowSet> train_flows;
  std::shared_ptr<const FlowSet> val_flows;
  std::shared_ptr<const FlowSet> test_flows;
  int sprites_per_sequence = 2;
  int train_count = 256;
  int val_count = 32;
  int test_count = 64;
  int sprite_count = 32;
  int sprite_size = 7;
  SpriteKind sprite_kind = SpriteKind::mixed;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument on T < 2, non-positive counts or missing sets.
  void validate() const;
  const std::shared_ptr<const FlowSet>& flows(Split s) const;
  int count(Split s) const;
};

struct SequenceMeta {
  std::vector<FlowGenerator> flows;  ///< one generator per sprite
  std::vector<int> sprite_ids;
  std::vector<Vec2> offsets;  ///< top-left placement of each sprite at t = 0
};

struct FlowSample {
  SpaceTimeSignal frames;
  SequenceMeta meta;
};

enum class BumpShape { delta, gaussian };

/// Frame t is amplitude·(bump at the origin) moved by ψ_t(ν).
SpaceTimeSignal gen_bump_sequence(const Grid& grid, const FlowGenerator& nu, int length,
                                  double amplitude, BumpShape shape = BumpShape::delta,
                                  double sigma = 1.0);

/// The sprite copied onto a zero grid with its top-left tap at `offset`.
Signal place_sprite(const Grid& grid, const Signal& sprite, Vec2 offset);

/// Rebuilds a sequence from its metadata; generated data satisfies
/// sample.frames == reconstruct_sequence(...) exactly.
SpaceTimeSignal reconstruct_sequence(const Grid& grid, int length, const SpriteBank& bank,
                                     const SequenceMeta& meta);

SpriteBank make_sprite_bank(const FlowDatasetConfig& cfg);

/// Sample `index` of a split depends only on (cfg, split, index).
FlowSample gen_flowing_sample(const FlowDatasetConfig& cfg, const SpriteBank& bank, Split split,
                              int index);
std::vector<FlowSample> gen_flowing_sprites(const FlowDatasetConfig& cfg, Split split);

std::vector<SpaceTimeSignal> frames_of(const std::vector<FlowSample>& samples);

struct VelocityMse {
  FlowGenerator nu;
  double mse = 0.0;
  std::size_t count = 0;
};

/// Mean of per-sequence MSE grouped by sprite generator. A sequence counts
/// once toward each distinct generator it contains. Rows follow `order` and
/// skip generators that never occur.
std::vector<VelocityMse> per_velocity_mse(const std::vector<FlowSample>& samples,
                                          const std::vector<double>& per_sequence_mse,
                                          const FlowSet& order);

/// True when every sprite generator of the sample lies in `v`.
bool all_flows_in(const SequenceMeta& meta, const FlowSet& v);

// Persistence: <dir>/manifest.json plus <dir>/<split>/seq_NNNNN.fseq.
void save_dataset(const std::filesystem::path& dir, const FlowDatasetConfig& cfg,
                  const std::vector<FlowSample>& train, const std::vector<FlowSample>& val,
                  const std::vector<FlowSample>& test);

struct LoadedDataset {
  FlowDatasetConfig config;
  std::vector<FlowSample> train;
  std::vector<FlowSample> val;
  std::vector<FlowSample> test;
};

/// Throws FormatError if the manifest is missing or malformed.
LoadedDataset load_dataset(const std::filesystem::path& dir);

}  // namespace flowrnn

#endif  // FLOWRNN_DATA_HPP_
