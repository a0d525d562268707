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

#include "flowrnn/data.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "flowrnn/errors.hpp"

namespace flowrnn {
namespace {

std::shared_ptr<const FlowSet> vt(int n) {
  return std::make_shared<const FlowSet>(build_translation_flow_set(n));
}

FlowDatasetConfig small_config() {
  FlowDatasetConfig cfg;
  cfg.grid = Grid(10, 10);
  cfg.length = 5;
  cfg.train_flows = cfg.val_flows = vt(1);
  cfg.test_flows = vt(2);
  cfg.train_count = 6;
  cfg.val_count = 3;
  cfg.test_count = 4;
  cfg.sprite_count = 5;
  cfg.seed = 42;
  return cfg;
}

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("flowrnn_" + name)) {
    std::filesystem::remove_all(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

double total(const Signal& s) {
  double acc = 0.0;
  for (double v : s.values()) acc += v;
  return acc;
}

TEST(BumpSequenceTest, StaticBumpRepeats) {
  const auto seq = gen_bump_sequence(Grid(5, 5), FlowGenerator::zero(), 4, 2.0);
  for (std::size_t t = 1; t < seq.length(); ++t) EXPECT_EQ(seq[t], seq[0]);
  EXPECT_EQ(seq[0].at(0, 0, 0), 2.0);
  EXPECT_EQ(total(seq[0]), 2.0);
}

TEST(BumpSequenceTest, DeltaBumpMovesOnePixelPerStep) {
  const auto seq = gen_bump_sequence(Grid(6, 6), FlowGenerator::translation(1, 0), 4, 1.0);
  for (int t = 0; t < 4; ++t) {
    EXPECT_EQ(seq[static_cast<std::size_t>(t)].at(0, t, 0), 1.0);
    EXPECT_EQ(total(seq[static_cast<std::size_t>(t)]), 1.0);
  }
}

TEST(BumpSequenceTest, GaussianFramesAreShiftedCopies) {
  const auto seq = gen_bump_sequence(Grid(9, 9), FlowGenerator::translation(0, 2), 5, 1.0,
                                     BumpShape::gaussian, 1.2);
  for (std::size_t t = 0; t < seq.length(); ++t) {
    const auto ti = static_cast<std::int64_t>(t);
    EXPECT_EQ(seq[t], act_translate(seq[0], {0, 2 * ti}));
  }
}

TEST(BumpSequenceTest, RejectsNonPositiveAmplitude) {
  EXPECT_THROW(gen_bump_sequence(Grid(4, 4), FlowGenerator::zero(), 3, 0.0), InvalidArgument);
}

TEST(SpriteBankTest, GeneratedSpritesAreValid) {
  for (SpriteKind kind : {SpriteKind::gaussian, SpriteKind::glyph, SpriteKind::mixed}) {
    const SpriteBank bank = SpriteBank::generate(6, 7, kind, 3);
    ASSERT_EQ(bank.size(), 6u);
    for (const auto& s : bank.sprites()) {
      EXPECT_EQ(s.grid(), Grid(7, 7));
      double peak = 0.0;
      for (double v : s.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        peak = std::max(peak, v);
      }
      EXPECT_GT(peak, 0.0);
    }
  }
  EXPECT_EQ(SpriteBank::generate(4, 7, SpriteKind::mixed, 9).sprites(),
            SpriteBank::generate(4, 7, SpriteKind::mixed, 9).sprites());
}

TEST(SpriteBankTest, RejectsInvalidSprites) {
  EXPECT_THROW(SpriteBank({Signal(Grid(3, 3), 1)}), InvalidArgument);
  EXPECT_THROW(SpriteBank({Signal(Grid(1, 1), 1, {1.5})}), InvalidArgument);
  EXPECT_THROW(SpriteBank(std::vector<Signal>{}), InvalidArgument);
}

TEST(FlowingSpritesTest, StaticSingleSpriteIsConstant) {
  FlowDatasetConfig cfg = small_config();
  cfg.sprites_per_sequence = 1;
  cfg.train_flows = std::make_shared<const FlowSet>(singleton_flow_set());
  const SpriteBank bank = make_sprite_bank(cfg);
  const FlowSample s = gen_flowing_sample(cfg, bank, Split::train, 0);
  const Signal placed = place_sprite(cfg.grid, bank[static_cast<std::size_t>(s.meta.sprite_ids[0])],
                                     s.meta.offsets[0]);
  for (std::size_t t = 0; t < s.frames.length(); ++t) EXPECT_EQ(s.frames[t], placed);
}

TEST(FlowingSpritesTest, TwoStaticSpritesSum) {
  FlowDatasetConfig cfg = small_config();
  cfg.train_flows = std::make_shared<const FlowSet>(singleton_flow_set());
  const SpriteBank bank = make_sprite_bank(cfg);
  const FlowSample s = gen_flowing_sample(cfg, bank, Split::train, 1);
  Signal sum = place_sprite(cfg.grid, bank[static_cast<std::size_t>(s.meta.sprite_ids[0])],
                            s.meta.offsets[0]);
  sum = sum + place_sprite(cfg.grid, bank[static_cast<std::size_t>(s.meta.sprite_ids[1])],
                           s.meta.offsets[1]);
  for (std::size_t t = 0; t < s.frames.length(); ++t) EXPECT_EQ(s.frames[t], sum);
}

TEST(FlowingSpritesTest, FramesReconstructFromMetadata) {
  const FlowDatasetConfig cfg = small_config();
  const SpriteBank bank = make_sprite_bank(cfg);
  for (Split split : {Split::train, Split::val, Split::test}) {
    for (const auto& s : gen_flowing_sprites(cfg, split)) {
      ASSERT_EQ(s.meta.flows.size(), 2u);
      EXPECT_TRUE(cfg.flows(split)->contains(s.meta.flows[0]));
      // Independent oracle: place each sprite and apply the flow element.
      for (std::size_t t = 0; t < s.frames.length(); ++t) {
        Signal expected(cfg.grid, 1);
        for (std::size_t k = 0; k < 2; ++k) {
          const Signal placed = place_sprite(
              cfg.grid, bank[static_cast<std::size_t>(s.meta.sprite_ids[k])], s.meta.offsets[k]);
          expected = expected + act(flow_element(s.meta.flows[k], static_cast<std::int64_t>(t)),
                                    placed);
        }
        EXPECT_EQ(s.frames[t], expected);
      }
      EXPECT_EQ(s.frames, reconstruct_sequence(cfg.grid, cfg.length, bank, s.meta));
    }
  }
}

TEST(FlowingSpritesTest, GeneratorHistogramIsUniform) {
  FlowDatasetConfig cfg = small_config();
  cfg.test_count = 100;
  const auto samples = gen_flowing_sprites(cfg, Split::test);
  std::map<std::pair<std::int64_t, std::int64_t>, int> hist;
  int draws = 0;
  for (const auto& s : samples) {
    for (const auto& nu : s.meta.flows) {
      ++hist[{nu.velocity.x, nu.velocity.y}];
      ++draws;
    }
  }
  const double expected = draws / 25.0;
  double chi2 = 0.0;
  for (const auto& nu : cfg.test_flows->generators()) {
    const double o = hist[{nu.velocity.x, nu.velocity.y}];
    chi2 += (o - expected) * (o - expected) / expected;
  }
  EXPECT_EQ(hist.size(), 25u);
  // Upper 0.001 quantile of chi-square with 24 degrees of freedom.
  EXPECT_LT(chi2, 51.179);
}

TEST(FlowingSpritesTest, SplitsUseDisjointStreams) {
  FlowDatasetConfig cfg = small_config();
  cfg.test_flows = vt(1);
  const auto train = gen_flowing_sprites(cfg, Split::train);
  const auto val = gen_flowing_sprites(cfg, Split::val);
  const auto test = gen_flowing_sprites(cfg, Split::test);
  for (std::size_t i = 0; i < val.size(); ++i) {
    EXPECT_NE(train[i].frames, val[i].frames);
    EXPECT_NE(train[i].frames, test[i].frames);
    EXPECT_NE(val[i].frames, test[i].frames);
  }
}

TEST(FlowingSpritesTest, SampleDependsOnlyOnIndex) {
  const FlowDatasetConfig cfg = small_config();
  const SpriteBank bank = make_sprite_bank(cfg);
  const auto all = gen_flowing_sprites(cfg, Split::train);
  EXPECT_EQ(gen_flowing_sample(cfg, bank, Split::train, 4).frames, all[4].frames);
  FlowDatasetConfig other = cfg;
  other.seed = 43;
  EXPECT_NE(gen_flowing_sprites(other, Split::train)[0].frames, all[0].frames);
}

TEST(FlowDatasetConfigTest, ValidateRejectsBadValues) {
  FlowDatasetConfig cfg = small_config();
  cfg.length = 1;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = small_config();
  cfg.val_count = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = small_config();
  cfg.test_flows.reset();
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  EXPECT_EQ(parse_split("val"), Split::val);
  EXPECT_EQ(parse_sprite_kind("glyph"), SpriteKind::glyph);
}

TEST(PerVelocityMseTest, GroupsBySpriteGenerators) {
  std::vector<FlowSample> samples(2);
  samples[0].meta.flows = {FlowGenerator::translation(1, 0), FlowGenerator::zero()};
  samples[1].meta.flows = {FlowGenerator::translation(1, 0), FlowGenerator::translation(1, 0)};
  const auto rows = per_velocity_mse(samples, {1.0, 3.0}, build_translation_flow_set(1));
  ASSERT_EQ(rows.size(), 2u);
  std::map<std::int64_t, VelocityMse> by_x;
  for (const auto& r : rows) by_x[r.nu.velocity.x] = r;
  EXPECT_DOUBLE_EQ(by_x[1].mse, 2.0);
  EXPECT_EQ(by_x[0].count, 1u);
  EXPECT_DOUBLE_EQ(by_x[0].mse, 1.0);
  EXPECT_TRUE(all_flows_in(samples[0].meta, build_translation_flow_set(1)));
  EXPECT_FALSE(all_flows_in(samples[0].meta, singleton_flow_set()));
}

TEST(DatasetIoTest, SaveLoadRoundTrip) {
  const TempDir dir("dataset_roundtrip");
  const FlowDatasetConfig cfg = small_config();
  const auto train = gen_flowing_sprites(cfg, Split::train);
  const auto val = gen_flowing_sprites(cfg, Split::val);
  const auto test = gen_flowing_sprites(cfg, Split::test);
  save_dataset(dir.path(), cfg, train, val, test);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "manifest.json"));
  const LoadedDataset back = load_dataset(dir.path());
  ASSERT_EQ(back.train.size(), train.size());
  ASSERT_EQ(back.test.size(), test.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    EXPECT_EQ(back.train[i].frames, train[i].frames);
    EXPECT_EQ(back.train[i].meta.flows, train[i].meta.flows);
    EXPECT_EQ(back.train[i].meta.sprite_ids, train[i].meta.sprite_ids);
    EXPECT_EQ(back.train[i].meta.offsets, train[i].meta.offsets);
  }
  EXPECT_EQ(back.config.seed, cfg.seed);
  EXPECT_EQ(*back.config.test_flows, *cfg.test_flows);
  EXPECT_EQ(back.config.grid, cfg.grid);
}

TEST(DatasetIoTest, MissingOrMalformedManifestThrows) {
  const TempDir dir("dataset_bad");
  EXPECT_THROW(load_dataset(dir.path()), FormatError);
  std::filesystem::create_directories(dir.path());
  std::ofstream(dir.path() / "manifest.json") << "{\"config\": 3}";
  EXPECT_THROW(load_dataset(dir.path()), FormatError);
}

}  // namespace
}  // namespace flowrnn
