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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "flowrnn/errors.hpp"
#include "flowrnn/io.hpp"

namespace flowrnn {

SpriteKind parse_sprite_kind(const std::string& s) {
  if (s == "gaussian") return SpriteKind::gaussian;
  if (s == "glyph") return SpriteKind::glyph;
  if (s == "mixed") return SpriteKind::mixed;
  throw InvalidArgument("unknown sprite kind '" + s + "'");
}

std::string to_string(SpriteKind k) {
  switch (k) {
    case SpriteKind::gaussian: return "gaussian";
    case SpriteKind::glyph: return "glyph";
    case SpriteKind::mixed: return "mixed";
  }
  return "?";
}

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw InvalidArgument("unknown split '" + s + "'");
}

SpriteBank::SpriteBank(std::vector<Signal> sprites) : sprites_(std::move(sprites)) {
  if (sprites_.empty()) throw InvalidArgument("a sprite bank needs at least one sprite");
  for (const auto& s : sprites_) {
    bool nonzero = false;
    for (double v : s.values()) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("sprite values must lie in [0, 1]");
      nonzero = nonzero || v > 0.0;
    }
    if (!nonzero) throw InvalidArgument("sprites must not be all zero");
  }
}

namespace {

std::mt19937_64 stream(std::initializer_list<std::uint64_t> words) {
  std::vector<std::uint32_t> seeds;
  for (auto w : words) {
    seeds.push_back(static_cast<std::uint32_t>(w));
    seeds.push_back(static_cast<std::uint32_t>(w >> 32));
  }
  std::seed_seq seq(seeds.begin(), seeds.end());
  return std::mt19937_64(seq);
}

Signal gaussian_sprite(int size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(-0.75, 0.75);
  std::uniform_real_distribution<double> width(0.8, 1.8);
  const double c = (size - 1) / 2.0;
  const double cx = c + jitter(rng), cy = c + jitter(rng);
  const double sx = width(rng), sy = width(rng);
  Signal s(Grid(size, size), 1);
  for (int x = 0; x < size; ++x) {
    for (int y = 0; y < size; ++y) {
      const double dx = (x - cx) / sx, dy = (y - cy) / sy;
      s.at(0, x, y) = std::exp(-0.5 * (dx * dx + dy * dy));
    }
  }
  return s;
}

Signal glyph_sprite(int size, std::mt19937_64& rng) {
  std::bernoulli_distribution on(0.45);
  Signal s(Grid(size, size), 1);
  int lit = 0;
  while (lit < 3) {
    lit = 0;
    for (int x = 1; x + 1 < size; ++x) {
      for (int y = 1; y + 1 < size; ++y) {
        const bool v = on(rng);
        s.at(0, x, y) = v ? 1.0 : 0.0;
        lit += v ? 1 : 0;
      }
    }
    if (size < 3) {
      s.at(0, 0, 0) = 1.0;
      lit = 3;
    }
  }
  return s;
}

}  // namespace

SpriteBank SpriteBank::generate(int count, int size, SpriteKind kind, std::uint64_t seed) {
  if (count < 1 || size < 1) throw InvalidArgument("sprite count and size must be >= 1");
  auto rng = stream({seed, 0x5b1e});
  std::vector<Signal> out;
  for (int i = 0; i < count; ++i) {
    const bool glyph = kind == SpriteKind::glyph || (kind == SpriteKind::mixed && i % 2 == 1);
    out.push_back(glyph ? glyph_sprite(size, rng) : gaussian_sprite(size, rng));
  }
  return SpriteBank(std::move(out));
}

void FlowDatasetConfig::validate() const {
  if (length < 2) throw InvalidArgument("sequence length must be >= 2");
  if (train_count < 1 || val_count < 1 || test_count < 1) {
    throw InvalidArgument("split counts must be >= 1");
  }
  if (sprites_per_sequence < 1) throw InvalidArgument("sprites_per_sequence must be >= 1");
  if (!train_flows || !val_flows || !test_flows) throw InvalidArgument("missing flow set");
  for (const auto* v : {train_flows.get(), val_flows.get(), test_flows.get()}) {
    if (v->has_rotation() && !grid.is_square()) {
      throw NonSquareGrid("rotation flows need a square grid");
    }
  }
}

const std::shared_ptr<const FlowSet>& FlowDatasetConfig::flows(Split s) const {
  switch (s) {
    case Split::train: return train_flows;
    case Split::val: return val_flows;
    case Split::test: return test_flows;
  }
  return test_flows;
}

int FlowDatasetConfig::count(Split s) const {
  switch (s) {
    case Split::train: return train_count;
    case Split::val: return val_count;
    case Split::test: return test_count;
  }
  return 0;
}

SpaceTimeSignal gen_bump_sequence(const Grid& grid, const FlowGenerator& nu, int length,
                                  double amplitude, BumpShape shape, double sigma) {
  if (!(amplitude > 0.0)) throw InvalidArgument("bump amplitude must be positive");
  if (length < 1) throw InvalidArgument("bump sequence length must be >= 1");
  Signal base(grid, 1);
  if (shape == BumpShape::delta) {
    base.at(0, 0, 0) = amplitude;
  } else {
    for (int x = 0; x < grid.height; ++x) {
      for (int y = 0; y < grid.width; ++y) {
        // Cyclic distance to the origin.
        const double dx = std::min(x, grid.height - x);
        const double dy = std::min(y, grid.width - y);
        base.at(0, x, y) = amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      }
    }
  }
  SpaceTimeSignal out;
  for (int t = 0; t < length; ++t) out.push_back(act(flow_element(nu, t), base));
  return out;
}

Signal place_sprite(const Grid& grid, const Signal& sprite, Vec2 offset) {
  Signal out(grid, sprite.channels());
  const Grid& sg = sprite.grid();
  for (int k = 0; k < sprite.channels(); ++k) {
    for (int a = 0; a < sg.height; ++a) {
      for (int b = 0; b < sg.width; ++b) {
        out.at(k, offset.x + a, offset.y + b) += sprite.at(k, a, b);
      }
    }
  }
  return out;
}

SpaceTimeSignal reconstruct_sequence(const Grid& grid, int length, const SpriteBank& bank,
                                     const SequenceMeta& meta) {
  std::vector<Signal> placed;
  for (std::size_t i = 0; i < meta.flows.size(); ++i) {
    placed.push_back(
        place_sprite(grid, bank[static_cast<std::size_t>(meta.sprite_ids[i])], meta.offsets[i]));
  }
  SpaceTimeSignal out;
  for (int t = 0; t < length; ++t) {
    Signal frame(grid, placed[0].channels());
    for (std::size_t i = 0; i < placed.size(); ++i) {
      frame = frame + act(flow_element(meta.flows[i], t), placed[i]);
    }
    out.push_back(std::move(frame));
  }
  return out;
}

SpriteBank make_sprite_bank(const FlowDatasetConfig& cfg) {
  return SpriteBank::generate(cfg.sprite_count, cfg.sprite_size, cfg.sprite_kind, cfg.seed);
}

FlowSample gen_flowing_sample(const FlowDatasetConfig& cfg, const SpriteBank& bank, Split split,
                              int index) {
  const FlowSet& v = *cfg.flows(split);
  auto rng = stream({cfg.seed, static_cast<std::uint64_t>(split) + 1,
                     static_cast<std::uint64_t>(index)});
  std::uniform_int_distribution<std::size_t> pick_flow(0, v.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_sprite(0, bank.size() - 1);
  std::uniform_int_distribution<int> pick_x(0, cfg.grid.height - 1);
  std::uniform_int_distribution<int> pick_y(0, cfg.grid.width - 1);
  FlowSample s;
  for (int i = 0; i < cfg.sprites_per_sequence; ++i) {
    s.meta.flows.push_back(v[pick_flow(rng)]);
    s.meta.sprite_ids.push_back(static_cast<int>(pick_sprite(rng)));
    const int x = pick_x(rng);
    s.meta.offsets.push_back({x, pick_y(rng)});
  }
  s.frames = reconstruct_sequence(cfg.grid, cfg.length, bank, s.meta);
  return s;
}

std::vector<FlowSample> gen_flowing_sprites(const FlowDatasetConfig& cfg, Split split) {
  cfg.validate();
  const SpriteBank bank = make_sprite_bank(cfg);
  std::vector<FlowSample> out;
  const int n = cfg.count(split);
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(gen_flowing_sample(cfg, bank, split, i));
  return out;
}

std::vector<SpaceTimeSignal> frames_of(const std::vector<FlowSample>& samples) {
  std::vector<SpaceTimeSignal> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.frames);
  return out;
}

std::vector<VelocityMse> per_velocity_mse(const std::vector<FlowSample>& samples,
                                          const std::vector<double>& per_sequence_mse,
                                          const FlowSet& order) {
  if (samples.size() != per_sequence_mse.size()) {
    throw ShapeMismatch("one MSE value per sample is required");
  }
  std::vector<VelocityMse> rows;
  for (const auto& nu : order.generators()) rows.push_back({nu, 0.0, 0});
  std::vector<std::size_t> seen;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    seen.clear();
    for (const auto& nu : samples[i].meta.flows) {
      auto pos = order.find(nu);
      if (!pos || std::find(seen.begin(), seen.end(), *pos) != seen.end()) continue;
      seen.push_back(*pos);
      rows[*pos].mse += per_sequence_mse[i];
      rows[*pos].count += 1;
    }
  }
  std::vector<VelocityMse> out;
  for (auto& r : rows) {
    if (r.count == 0) continue;
    r.mse /= static_cast<double>(r.count);
    out.push_back(r);
  }
  return out;
}

bool all_flows_in(const SequenceMeta& meta, const FlowSet& v) {
  for (const auto& nu : meta.flows) {
    if (!v.contains(nu)) return false;
  }
  return true;
}

namespace {

nlohmann::json meta_to_json(const SequenceMeta& m) {
  nlohmann::json j;
  auto flows = nlohmann::json::array();
  for (const auto& nu : m.flows) flows.push_back({nu.velocity.x, nu.velocity.y, nu.angular});
  j["flows"] = flows;
  j["sprite_ids"] = m.sprite_ids;
  auto offsets = nlohmann::json::array();
  for (const auto& o : m.offsets) offsets.push_back({o.x, o.y});
  j["offsets"] = offsets;
  return j;
}

SequenceMeta meta_from_json(const nlohmann::json& j) {
  SequenceMeta m;
  for (const auto& f : j.at("flows")) {
    m.flows.push_back({{f.at(0).get<std::int64_t>(), f.at(1).get<std::int64_t>()},
                       f.at(2).get<int>()});
  }
  m.sprite_ids = j.at("sprite_ids").get<std::vector<int>>();
  for (const auto& o : j.at("offsets")) {
    m.offsets.push_back({o.at(0).get<std::int64_t>(), o.at(1).get<std::int64_t>()});
  }
  return m;
}

std::string sequence_file(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "seq_%05d.fseq", i);
  return buf;
}

}  // namespace

void save_dataset(const std::filesystem::path& dir, const FlowDatasetConfig& cfg,
                  const std::vector<FlowSample>& train, const std::vector<FlowSample>& val,
                  const std::vector<FlowSample>& test) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "flowrnn-dataset";
  manifest["version"] = 1;
  nlohmann::json c;
  c["height"] = cfg.grid.height;
  c["width"] = cfg.grid.width;
  c["length"] = cfg.length;
  c["train_flows"] = nlohmann::json::parse(flow_set_to_json(*cfg.train_flows));
  c["val_flows"] = nlohmann::json::parse(flow_set_to_json(*cfg.val_flows));
  c["test_flows"] = nlohmann::json::parse(flow_set_to_json(*cfg.test_flows));
  c["sprites_per_sequence"] = cfg.sprites_per_sequence;
  c["train_count"] = cfg.train_count;
  c["val_count"] = cfg.val_count;
  c["test_count"] = cfg.test_count;
  c["sprite_count"] = cfg.sprite_count;
  c["sprite_size"] = cfg.sprite_size;
  c["sprite_kind"] = to_string(cfg.sprite_kind);
  c["seed"] = cfg.seed;
  manifest["config"] = c;

  const std::pair<Split, const std::vector<FlowSample>*> splits[] = {
      {Split::train, &train}, {Split::val, &val}, {Split::test, &test}};
  for (const auto& [split, samples] : splits) {
    const auto name = to_string(split);
    std::filesystem::create_directories(dir / name);
    auto entries = nlohmann::json::array();
    for (std::size_t i = 0; i < samples->size(); ++i) {
      const std::string file = name + "/" + sequence_file(static_cast<int>(i));
      save_sequence(dir / file, (*samples)[i].frames);
      nlohmann::json e = meta_to_json((*samples)[i].meta);
      e["file"] = file;
      entries.push_back(e);
    }
    manifest["splits"][name] = entries;
  }
  std::ofstream os(dir / "manifest.json");
  if (!os) throw FormatError("cannot write manifest in " + dir.string());
  os << manifest.dump(2) << "\n";
}

LoadedDataset load_dataset(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  std::ifstream is(path);
  if (!is) throw FormatError("missing dataset manifest " + path.string());
  LoadedDataset out;
  try {
    const auto manifest = nlohmann::json::parse(is);
    const auto& c = manifest.at("config");
    auto& cfg = out.config;
    cfg.grid = Grid(c.at("height").get<int>(), c.at("width").get<int>());
    cfg.length = c.at("length").get<int>();
    cfg.train_flows = std::make_shared<const FlowSet>(flow_set_from_json(c.at("train_flows").dump()));
    cfg.val_flows = std::make_shared<const FlowSet>(flow_set_from_json(c.at("val_flows").dump()));
    cfg.test_flows = std::make_shared<const FlowSet>(flow_set_from_json(c.at("test_flows").dump()));
    cfg.sprites_per_sequence = c.at("sprites_per_sequence").get<int>();
    cfg.train_count = c.at("train_count").get<int>();
    cfg.val_count = c.at("val_count").get<int>();
    cfg.test_count = c.at("test_count").get<int>();
    cfg.sprite_count = c.at("sprite_count").get<int>();
    cfg.sprite_size = c.at("sprite_size").get<int>();
    cfg.sprite_kind = parse_sprite_kind(c.at("sprite_kind").get<std::string>());
    cfg.seed = c.at("seed").get<std::uint64_t>();
    for (auto split : {Split::train, Split::val, Split::test}) {
      auto& dst = split == Split::train ? out.train : split == Split::val ? out.val : out.test;
      for (const auto& e : manifest.at("splits").at(to_string(split))) {
        FlowSample s;
        s.meta = meta_from_json(e);
        s.frames = load_sequence(dir / e.at("file").get<std::string>());
        dst.push_back(std::move(s));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad dataset manifest: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("bad dataset manifest: ") + e.what());
  }
  return out;
}

}  // namespace flowrnn
