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

#include "flowrnn/group_flow.hpp"

#include <functional>
#include <nlohmann/json.hpp>
#include <sstream>

#include "flowrnn/errors.hpp"

namespace flowrnn {

Vec2 rotate_quarter(Vec2 v, int quarter_turns) {
  switch (static_cast<int>(wrap_index(quarter_turns, 4))) {
    case 0:
      return v;
    case 1:
      return {-v.y, v.x};
    case 2:
      return {-v.x, -v.y};
    default:
      return {v.y, -v.x};
  }
}

GroupElement GroupElement::rotate(int quarter_turns) {
  return {{0, 0}, static_cast<int>(wrap_index(quarter_turns, 4))};
}

GroupElement GroupElement::operator*(const GroupElement& other) const {
  return {translation + rotate_quarter(other.translation, rotation),
          static_cast<int>(wrap_index(rotation + other.rotation, 4))};
}

GroupElement GroupElement::inverse() const {
  return {rotate_quarter(-translation, -rotation),
          static_cast<int>(wrap_index(-rotation, 4))};
}

Vec2 GroupElement::apply(Vec2 p) const { return rotate_quarter(p, rotation) + translation; }

GroupElement power(const GroupElement& g, std::int64_t n) {
  GroupElement base = n < 0 ? g.inverse() : g;
  std::uint64_t e = n < 0 ? static_cast<std::uint64_t>(-n) : static_cast<std::uint64_t>(n);
  GroupElement result = GroupElement::identity();
  while (e != 0) {
    if (e & 1U) result = result * base;
    base = base * base;
    e >>= 1U;
  }
  return result;
}

std::string to_string(const FlowGenerator& nu) {
  std::ostringstream os;
  if (nu.angular == 0) {
    os << '(' << nu.velocity.x << ',' << nu.velocity.y << ')';
  } else if (nu.velocity == Vec2{}) {
    os << "rot" << nu.angular;
  } else {
    os << '(' << nu.velocity.x << ',' << nu.velocity.y << ";rot" << nu.angular << ')';
  }
  return os.str();
}

GroupElement flow_element(const FlowGenerator& nu, std::int64_t t) {
  if (nu.angular == 0) return {t * nu.velocity, 0};
  if (nu.velocity == Vec2{}) {
    return GroupElement::rotate(static_cast<int>(wrap_index(t * nu.angular, 4)));
  }
  return power(GroupElement{nu.velocity, static_cast<int>(wrap_index(nu.angular, 4))}, t);
}

std::size_t FlowSet::KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h = std::hash<std::int64_t>{}(k.x);
  h = h * 1000003U ^ std::hash<std::int64_t>{}(k.y);
  h = h * 1000003U ^ std::hash<int>{}(k.w);
  return h;
}

FlowSet::FlowSet(std::vector<FlowGenerator> generators, FlowKind kind, int radius)
    : generators_(std::move(generators)), kind_(kind), radius_(radius) {
  if (generators_.empty()) throw InvalidArgument("FlowSet: empty generator list");
  index_.reserve(generators_.size());
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    const auto& g = generators_[i];
    if (!index_.emplace(Key{g.velocity.x, g.velocity.y, g.angular}, i).second) {
      throw InvalidArgument("FlowSet: duplicate generator " + to_string(g));
    }
  }
}

std::optional<std::size_t> FlowSet::find(const FlowGenerator& nu) const {
  auto it = index_.find(Key{nu.velocity.x, nu.velocity.y, nu.angular});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FlowSet::index_of(const FlowGenerator& nu) const {
  if (auto i = find(nu)) return *i;
  throw GeneratorNotInSet("generator " + to_string(nu) + " is not in the flow set");
}

bool FlowSet::has_rotation() const {
  for (const auto& g : generators_) {
    if (g.angular != 0) return true;
  }
  return false;
}

FlowSet build_translation_flow_set(int radius) {
  if (radius < 0) throw InvalidArgument("translation flow set radius must be >= 0");
  std::vector<FlowGenerator> gens;
  gens.reserve(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)));
  for (int vx = -radius; vx <= radius; ++vx) {
    for (int vy = -radius; vy <= radius; ++vy) {
      gens.push_back(FlowGenerator::translation(vx, vy));
    }
  }
  return FlowSet(std::move(gens), FlowKind::translation, radius);
}

FlowSet build_rotation_flow_set(int radius) {
  if (radius < 0) throw InvalidArgument("rotation flow set radius must be >= 0");
  std::vector<FlowGenerator> gens;
  for (int k = -radius; k <= radius; ++k) gens.push_back(FlowGenerator::rotation(k));
  return FlowSet(std::move(gens), FlowKind::rotation, radius);
}

FlowSet singleton_flow_set() { return build_translation_flow_set(0); }

namespace {

std::int64_t wrap_component(std::int64_t v, int radius) {
  const std::int64_t period = 2 * static_cast<std::int64_t>(radius) + 1;
  return wrap_index(v + radius, period) - radius;
}

}  // namespace

std::optional<std::size_t> shift_index(const FlowSet& flow_set, const FlowGenerator& nu,
                                       const FlowGenerator& nu_hat, Truncation mode) {
  flow_set.index_of(nu);
  FlowGenerator diff = nu - nu_hat;
  if (mode == Truncation::wrap) {
    if (flow_set.radius() < 0 || flow_set.kind() == FlowKind::custom) {
      throw InvalidArgument("wrap truncation requires a standard flow set");
    }
    const int n = flow_set.radius();
    if (flow_set.kind() == FlowKind::translation) {
      diff.velocity = {wrap_component(diff.velocity.x, n), wrap_component(diff.velocity.y, n)};
    } else {
      diff.angular = static_cast<int>(wrap_component(diff.angular, n));
    }
  }
  return flow_set.find(diff);
}

std::string flow_set_to_json(const FlowSet& flow_set) {
  nlohmann::json j;
  switch (flow_set.kind()) {
    case FlowKind::translation:
      j["kind"] = "translation";
      break;
    case FlowKind::rotation:
      j["kind"] = "rotation";
      break;
    case FlowKind::custom:
      j["kind"] = "custom";
      break;
  }
  j["N"] = flow_set.radius();
  auto gens = nlohmann::json::array();
  for (const auto& g : flow_set.generators()) {
    switch (flow_set.kind()) {
      case FlowKind::translation:
        gens.push_back({g.velocity.x, g.velocity.y});
        break;
      case FlowKind::rotation:
        gens.push_back(g.angular);
        break;
      case FlowKind::custom:
        gens.push_back({g.velocity.x, g.velocity.y, g.angular});
        break;
    }
  }
  j["generators"] = std::move(gens);
  return j.dump();
}

FlowSet flow_set_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    const std::string kind = j.at("kind").get<std::string>();
    const int radius = j.value("N", -1);
    std::vector<FlowGenerator> gens;
    for (const auto& g : j.at("generators")) {
      if (kind == "translation") {
        gens.push_back(FlowGenerator::translation(g.at(0).get<std::int64_t>(),
                                                  g.at(1).get<std::int64_t>()));
      } else if (kind == "rotation") {
        gens.push_back(FlowGenerator::rotation(g.get<int>()));
      } else if (kind == "custom") {
        gens.push_back({{g.at(0).get<std::int64_t>(), g.at(1).get<std::int64_t>()},
                        g.at(2).get<int>()});
      } else {
        throw FormatError("unknown flow set kind '" + kind + "'");
      }
    }
    const FlowKind k = kind == "translation" ? FlowKind::translation
                       : kind == "rotation"  ? FlowKind::rotation
                                             : FlowKind::custom;
    return FlowSet(std::move(gens), k, radius);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("flow set JSON: ") + e.what());
  }
}

}  // namespace flowrnn
