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
#include "pathmpnn/paths.hpp"
#include "pathmpnn/synth.hpp"

using namespace pmpnn;

namespace {

int bond_weight(BondOrder o) {
  switch (o) {
    case BondOrder::kSingle: return 1;
    case BondOrder::kDouble: return 2;
    case BondOrder::kTriple: return 3;
    case BondOrder::kAromatic: return 1;
  }
  return 0;
}

}  // namespace

TEST_CASE("place atom reproduces the internal coordinates") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 a = {u(rng), u(rng), u(rng)};
    const Vec3 b = {u(rng) + 1.5, u(rng), u(rng)};
    const Vec3 c = {u(rng) + 3.0, u(rng) + 1.0, u(rng)};
    const double bond = 1.5, angle = 1.9, torsion = 3.0 * u(rng);
    const Vec3 d = place_atom(a, b, c, bond, angle, torsion);
    const std::vector<Vec3> xyz = {a, b, c, d};
    CHECK(std::hypot(d[0] - c[0], d[1] - c[1], d[2] - c[2]) == doctest::Approx(bond).epsilon(1e-10));
    CHECK(bond_angle(xyz, 1, 2, 3) == doctest::Approx(angle).epsilon(1e-10));
    CHECK(oracle::dihedral(a, b, c, d) == doctest::Approx(torsion).epsilon(1e-9));
  }
}

TEST_CASE("alcohol-count targets match the hydroxyl oracle") {
  const MoleculeDataset ds = generate_alcohol_count(200, 8);
  CHECK(ds.vocabulary == std::vector<std::string>{"C", "N", "O"});
  const int valence_of[] = {4, 3, 2};
  int with_rings = 0;
  for (const auto& r : ds.records) {
    r.validate();
    CHECK(r.atoms.size() >= 6);
    CHECK(r.atoms.size() <= 12);
    const Graph g = build_graph(r, {ds.vocabulary, false, false});
    CHECK(r.targets[0] == static_cast<double>(oracle::hydroxyl_oxygens(g).size()));
    std::vector<int> used(r.atoms.size(), 0);
    for (const Bond& b : r.bonds) {
      used[b.i] += bond_weight(b.order);
      used[b.j] += bond_weight(b.order);
    }
    for (std::size_t a = 0; a < r.atoms.size(); ++a) {
      const auto& e = r.atoms[a].element;
      CHECK(used[a] <= valence_of[e == "C" ? 0 : e == "N" ? 1 : 2]);
    }
    if (r.bonds.size() >= r.atoms.size()) ++with_rings;
  }
  CHECK(with_rings > 0);
}

TEST_CASE("dihedral-sum targets match the projection oracle") {
  const MoleculeDataset ds = generate_dihedral_sum(100, 9);
  for (const auto& r : ds.records) {
    r.validate();
    CHECK(r.has_coords());
    CHECK(r.bonds.size() + 1 == r.atoms.size());
    const Graph g = build_graph(r, {ds.vocabulary, false, false});
    double want = 0.0;
    for (int v = 0; v < g.num_nodes(); ++v) {
      for (const Path& p : enumerate_paths(g, v, 3)) {
        if (p.length() != 3 || p.nodes.front() > p.nodes.back()) continue;
        want += std::cos(oracle::dihedral(g.coords(p.nodes[0]), g.coords(p.nodes[1]), g.coords(p.nodes[2]),
                                          g.coords(p.nodes[3])));
      }
    }
    CHECK(r.targets[0] == doctest::Approx(want).epsilon(1e-9));
    for (int v = 0; v < g.num_nodes(); ++v) CHECK(g.degree(v) <= 3);
  }
}

TEST_CASE("generators are deterministic") {
  for (SynthTask task : {SynthTask::kAlcoholCount, SynthTask::kDihedralSum}) {
    const auto a = generate_synthetic(task, 20, 5);
    const auto b = generate_synthetic(task, 20, 5);
    const auto c = generate_synthetic(task, 20, 6);
    bool same = true, differs = false;
    for (int i = 0; i < 20; ++i) {
      same = same && format_molecule_line(a.records[i]) == format_molecule_line(b.records[i]);
      differs = differs || format_molecule_line(a.records[i]) != format_molecule_line(c.records[i]);
    }
    CHECK(same);
    CHECK(differs);
  }
  CHECK(parse_synth_task("dihedral-sum") == SynthTask::kDihedralSum);
  CHECK(to_string(SynthTask::kAlcoholCount) == "alcohol-count");
  CHECK_THROWS_AS(parse_synth_task("nope"), ValidationError);
}
