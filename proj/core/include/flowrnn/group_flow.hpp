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

#ifndef FLOWRNN_GROUP_FLOW_HPP_
#define FLOWRNN_GROUP_FLOW_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace flowrnn {

/// Integer pixel vector. `x` indexes grid rows (height), `y` columns (width).
struct Vec2 {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend Vec2 operator*(std::int64_t s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

/// Non-negative remainder, the only modulus used for cyclic coordinates.
constexpr std::int64_t wrap_index(std::int64_t v, std::int64_t n) {
  const std::int64_t r = v % n;
  return r < 0 ? r + n : r;
}

/// Applies the quarter-turn matrix A = [[0,-1],[1,0]] `quarter_turns` times.
/// The pivot is the lattice origin, i.e. pixel (0,0) of a cyclic grid.
Vec2 rotate_quarter(Vec2 v, int quarter_turns);

/// Element of Z^2 ⋊ C_4: acts on coordinates as p ↦ A^rotation p + translation.
/// With rotation == 0 this is the plain translation group.
struct GroupElement {
  Vec2 translation;
  int rotation = 0;  // in [0, 4)

  static GroupElement identity() { return {}; }
  static GroupElement translate(std::int64_t dx, std::int64_t dy) {
    return {{dx, dy}, 0};
  }
  static GroupElement rotate(int quarter_turns);

  /// Group product: (*this)(other(p)).
  GroupElement operator*(const GroupElement& other) const;
  GroupElement inverse() const;
  /// Unreduced action on a lattice point; callers reduce modulo their grid.
  Vec2 apply(Vec2 p) const;

  bool is_pure_translation() const { return rotation == 0; }
  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

/// n-th power, negative n meaning powers of the inverse.
GroupElement power(const GroupElement& g, std::int64_t n);

/// Flow generator: a translation velocity (pixels/step) and an angular
/// velocity (quarter turns/step). Standard sets use one or the other.
struct FlowGenerator {
  Vec2 velocity;
  int angular = 0;

  static FlowGenerator translation(std::int64_t vx, std::int64_t vy) {
    return {{vx, vy}, 0};
  }
  static FlowGenerator rotation(int quarter_turns_per_step) {
    return {{0, 0}, quarter_turns_per_step};
  }
  static FlowGenerator zero() { return {}; }

  bool is_zero() const { return velocity == Vec2{} && angular == 0; }

  friend FlowGenerator operator-(const FlowGenerator& a, const FlowGenerator& b) {
    return {a.velocity - b.velocity, a.angular - b.angular};
  }
  friend FlowGenerator operator+(const FlowGenerator& a, const FlowGenerator& b) {
    return {a.velocity + b.velocity, a.angular + b.angular};
  }
  friend FlowGenerator operator-(const FlowGenerator& a) {
    return {-a.velocity, -a.angular};
  }
  friend bool operator==(const FlowGenerator&, const FlowGenerator&) = default;
};

std::string to_string(const FlowGenerator& nu);

/// ψ_t(ν): the group element reached after flowing for `t` steps.
/// Pure translation generators give (t·v, 0); pure rotations give
/// (0, t·ω mod 4). Mixed generators use the one-parameter subgroup
/// generated by the element (v, ω).
GroupElement flow_element(const FlowGenerator& nu, std::int64_t t);

enum class FlowKind { translation, rotation, custom };

/// Boundary policy for ν − ν̂ lookups that leave a truncated set.
enum class Truncation {
  drop,  ///< out-of-set differences contribute nothing
  wrap,  ///< standard sets treated as a (2N+1)-torus per component
};

/// Ordered, finite set of flow generators with a reverse index.
///
/// Standard translation sets are stored in row-major velocity order:
/// vx ascending, then vy ascending. Rotation sets are stored by ascending ω.
class FlowSet {
 public:
  FlowSet(std::vector<FlowGenerator> generators, FlowKind kind = FlowKind::custom,
          int radius = -1);

  std::size_t size() const { return generators_.size(); }
  const FlowGenerator& operator[](std::size_t i) const { return generators_[i]; }
  const std::vector<FlowGenerator>& generators() const { return generators_; }
  FlowKind kind() const { return kind_; }
  /// N for the standard constructors, -1 for user sets.
  int radius() const { return radius_; }

  std::optional<std::size_t> find(const FlowGenerator& nu) const;
  bool contains(const FlowGenerator& nu) const { return find(nu).has_value(); }
  /// Throws GeneratorNotInSet.
  std::size_t index_of(const FlowGenerator& nu) const;
  /// True when any generator carries a nonzero angular velocity.
  bool has_rotation() const;

  friend bool operator==(const FlowSet& a, const FlowSet& b) {
    return a.generators_ == b.generators_;
  }

 private:
  struct Key {
    std::int64_t x, y;
    int w;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  std::vector<FlowGenerator> generators_;
  std::unordered_map<Key, std::size_t, KeyHash> index_;
  FlowKind kind_;
  int radius_;
};

/// V^T_N = {ν ∈ Z² : ‖ν‖∞ ≤ N}, (2N+1)² generators.
FlowSet build_translation_flow_set(int radius);
/// {k quarter turns/step : |k| ≤ N}.
FlowSet build_rotation_flow_set(int radius);
FlowSet singleton_flow_set();

/// Position of ν − ν̂ in V, or nullopt when it falls outside the set.
/// Throws GeneratorNotInSet if ν ∉ V. Wrap mode needs a standard set.
std::optional<std::size_t> shift_index(const FlowSet& flow_set, const FlowGenerator& nu,
                                       const FlowGenerator& nu_hat,
                                       Truncation mode = Truncation::drop);

/// {"kind":"translation","N":2,"generators":[[vx,vy],...]}; rotation sets
/// list integer angular velocities instead of pairs.
std::string flow_set_to_json(const FlowSet& flow_set);
FlowSet flow_set_from_json(std::string_view text);

}  // namespace flowrnn

#endif  // FLOWRNN_GROUP_FLOW_HPP_
