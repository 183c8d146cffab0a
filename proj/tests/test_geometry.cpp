// Copyright 2026 The PathMPNN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pathmpnn/error.hpp"
#include "pathmpnn/geometry.hpp"

using namespace pmpnn;

namespace {

constexpr double kPi = std::numbers::pi;

Graph chain_with(std::vector<Vec3> xyz) {
  const int n = static_cast<int>(xyz.size());
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  Graph g(n, edges);
  g.set_coords(std::move(xyz));
  return g;
}

std::array<Vec3, 4> random_quadruple(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::array<Vec3, 4> q;
  for (auto& p : q) p = {u(rng), u(rng), u(rng)};
  return q;
}

}  // namespace

TEST_CASE("bond angle examples") {
  const std::vector<Vec3> xyz = {{1, 0, 0}, {0, 0, 0}, {0, 1, 0}, {-2, 0, 0}};
  CHECK(bond_angle(xyz, 0, 1, 2) == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(bond_angle(xyz, 0, 1, 3) == doctest::Approx(kPi).epsilon(1e-12));
  // tetrahedron: carbon at the origin, hydrogens on alternating cube corners
  const std::vector<Vec3> ch4 = {{0, 0, 0}, {1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  for (int a = 1; a <= 4; ++a) {
    for (int b = a + 1; b <= 4; ++b) {
      CHECK(std::abs(bond_angle(ch4, a, 0, b) - std::acos(-1.0 / 3.0)) < 1e-6);
    }
  }
  const std::vector<Vec3> bad = {{0, 0, 0}, {0, 0, 0}, {1, 0, 0}};
  CHECK_THROWS_AS(bond_angle(bad, 0, 1, 2), DegenerateGeometryError);
}

TEST_CASE("dihedral cis and trans") {
  const std::vector<Vec3> cis = {{0, 1, 0}, {0, 0, 0}, {1, 0, 0}, {1, 1, 0}};
  const std::vector<Vec3> trans = {{0, 1, 0}, {0, 0, 0}, {1, 0, 0}, {1, -1, 0}};
  CHECK(std::abs(dihedral(cis, 0, 1, 2, 3)) < 1e-12);
  CHECK(std::abs(dihedral(trans, 0, 1, 2, 3)) == doctest::Approx(kPi).epsilon(1e-12));
  const std::vector<Vec3> line = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {2, 1, 0}};
  CHECK_THROWS_AS(dihedral(line, 0, 1, 2, 3), DegenerateGeometryError);
}

TEST_CASE("dihedral matches the projection oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto q = random_quadruple(rng);
    const std::vector<Vec3> xyz(q.begin(), q.end());
    const double got = dihedral(xyz, 0, 1, 2, 3);
    const double want = oracle::dihedral(q[0], q[1], q[2], q[3]);
    CHECK(std::abs(std::remainder(got - want, 2 * kPi)) < 1e-9);
    // reversed traversal gives the same signed angle
    CHECK(std::abs(std::remainder(dihedral(xyz, 3, 2, 1, 0) - got, 2 * kPi)) < 1e-9);
  }
}

TEST_CASE("reflection flips the dihedral sign") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = random_quadruple(rng);
    std::vector<Vec3> xyz(q.begin(), q.end());
    std::vector<Vec3> mirrored = xyz;
    for (Vec3& p : mirrored) p[2] = -p[2];
    const Graph g = chain_with(xyz);
    const Graph m = chain_with(mirrored);
    const Path path{{0, 1, 2, 3}};
    const auto a = geometry_path_features(g, path);
    const auto b = geometry_path_features(m, path);
    CHECK(dihedral(mirrored, 0, 1, 2, 3) == doctest::Approx(-dihedral(xyz, 0, 1, 2, 3)).epsilon(1e-12));
    CHECK(std::abs(*a.dihedral_sin + *b.dihedral_sin) < 1e-9);
    CHECK(std::abs(*a.dihedral_cos - *b.dihedral_cos) < 1e-9);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(a.bond_lengths[i] - b.bond_lengths[i]) < 1e-12);
    for (int i = 0; i < 2; ++i) CHECK(std::abs(a.angle_cosines[i] - b.angle_cosines[i]) < 1e-12);
  }
}

TEST_CASE("features are invariant under rigid motion") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> shift(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = random_quadruple(rng);
    std::vector<Vec3> xyz(q.begin(), q.end());
    const auto r = oracle::random_rotation(rng);
    const Vec3 t = {shift(rng), shift(rng), shift(rng)};
    std::vector<Vec3> moved;
    for (const Vec3& p : xyz) moved.push_back(oracle::apply(r, p, t));
    const Graph g = chain_with(xyz);
    const Graph h = chain_with(moved);
    for (int k = 1; k <= 3; ++k) {
      Path path;
      for (int i = 0; i <= k; ++i) path.nodes.push_back(i);
      const auto a = geometry_path_features(g, path).flatten();
      const auto b = geometry_path_features(h, path).flatten();
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-6);
    }
  }
}

TEST_CASE("feature shapes by path length") {
  const Graph g = chain_with({{0, 1, 0}, {0, 0, 0}, {1, 0, 0}, {1, -1, 0}});
  const auto one = geometry_path_features(g, Path{{0, 1}});
  CHECK(one.bond_lengths.size() == 1);
  CHECK(one.angle_cosines.empty());
  const auto two = geometry_path_features(g, Path{{0, 1, 2}});
  CHECK(two.angle_cosines.size() == 1);
  CHECK_FALSE(two.dihedral_cos.has_value());
  CHECK(two.flatten().size() == static_cast<std::size_t>(GeometryFeatures::width(2)));
  const auto three = geometry_path_features(g, Path{{0, 1, 2, 3}});
  CHECK(*three.dihedral_cos == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(*three.dihedral_sin) < 1e-12);
  CHECK(three.flatten().size() == static_cast<std::size_t>(GeometryFeatures::width(3)));
  const double c = *three.dihedral_cos;
  const double s = *three.dihedral_sin;
  CHECK(std::abs(c * c + s * s - 1.0) < 1e-9);
}

TEST_CASE("collinear torsion falls back") {
  const Graph g = chain_with({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {2, 1, 0}});
  const auto f = geometry_path_features(g, Path{{0, 1, 2, 3}});
  CHECK(f.degenerate);
  CHECK(*f.dihedral_cos == 1.0);
  CHECK(*f.dihedral_sin == 0.0);
  CHECK(f.flatten().back() == 1.0);
}

TEST_CASE("missing coordinates are rejected") {
  const Graph g(2, {{0, 1}});
  CHECK_THROWS_AS(geometry_path_features(g, Path{{0, 1}}), ValidationError);
}
