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

#include "pathmpnn/synth.hpp"

#include <cmath>
#include <numbers>
#include <queue>
#include <random>

#include "pathmpnn/chem.hpp"
#include "pathmpnn/error.hpp"
#include "pathmpnn/paths.hpp"

namespace pmpnn {

namespace {

Vec3 minus(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 normalized(const Vec3& a) {
  const double n = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  if (n < kGeometryEpsilon) throw DegenerateGeometryError("cannot place atom on a degenerate frame");
  return {a[0] / n, a[1] / n, a[2] / n};
}

int valence(const std::string& element) {
  if (element == "C") return 4;
  if (element == "N") return 3;
  return 2;
}

// Hop distances from `source` in a bond list over n atoms.
std::vector<int> distances(int n, const std::vector<Bond>& bonds, int source) {
  std::vector<std::vector<int>> adj(n);
  for (const auto& b : bonds) {
    adj[b.i].push_back(b.j);
    adj[b.j].push_back(b.i);
  }
  std::vector<int> dist(n, -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int w : adj[u]) {
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        q.push(w);
      }
    }
  }
  return dist;
}

MoleculeRecord random_alcohol_molecule(int index, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size_dist(6, 12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = size_dist(rng);
  MoleculeRecord r;
  r.id = "alcohol-" + std::to_string(index);
  std::vector<int> free_valence;
  r.atoms.push_back({"C", std::nullopt});
  free_valence.push_back(4);
  for (int i = 1; i < n; ++i) {
    const double pick = u(rng);
    std::string element = pick < 0.65 ? "C" : (pick < 0.77 ? "N" : "O");
    std::vector<int> hosts;
    int capacity = 0;
    for (int a = 0; a < i; ++a) {
      if (free_valence[a] > 0 && r.atoms[a].element != "O") {
        hosts.push_back(a);
        capacity += free_valence[a];
      }
    }
    const int host = hosts[std::uniform_int_distribution<std::size_t>(0, hosts.size() - 1)(rng)];
    BondOrder order = BondOrder::kSingle;
    if (element == "O" && r.atoms[host].element == "C" && free_valence[host] >= 2 && u(rng) < 0.4) {
      order = BondOrder::kDouble;
    }
    // A terminal oxygen must not use up the last open slot before the
    // molecule reaches its drawn size.
    if (element == "O" && i < n - 1 && capacity - (order == BondOrder::kDouble ? 2 : 1) < 1) {
      element = "C";
      order = BondOrder::kSingle;
    }
    const int used = order == BondOrder::kDouble ? 2 : 1;
    r.atoms.push_back({element, std::nullopt});
    free_valence.push_back(valence(element) - used);
    free_valence[host] -= used;
    r.bonds.push_back({host, i, order});
  }
  // Occasional ring closure between two carbons four or five bonds apart.
  if (u(rng) < 0.35) {
    const int m = static_cast<int>(r.atoms.size());
    std::vector<std::pair<int, int>> candidates;
    for (int a = 0; a < m; ++a) {
      if (r.atoms[a].element != "C" || free_valence[a] < 1) continue;
      const auto dist = distances(m, r.bonds, a);
      for (int b = a + 1; b < m; ++b) {
        if (r.atoms[b].element == "C" && free_valence[b] >= 1 && (dist[b] == 4 || dist[b] == 5)) {
          candidates.emplace_back(a, b);
        }
      }
    }
    if (!candidates.empty()) {
      const auto [a, b] =
          candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
      r.bonds.push_back({a, b, BondOrder::kSingle});
    }
  }
  return r;
}

MoleculeRecord random_dihedral_molecule(int index, std::mt19937_64& rng) {
  constexpr double kPi = std::numbers::pi;
  std::uniform_int_distribution<int> size_dist(6, 9);
  std::uniform_real_distribution<double> bond_dist(1.50, 1.58);
  std::uniform_real_distribution<double> angle_dist(100.0 * kPi / 180.0, 125.0 * kPi / 180.0);
  std::uniform_real_distribution<double> torsion_dist(-kPi, kPi);
  std::uniform_real_distribution<double> jitter(-0.35, 0.35);

  const int n = size_dist(rng);
  MoleculeRecord r;
  r.id = "dihedral-" + std::to_string(index);
  std::vector<Vec3> pos;
  std::vector<int> parent;
  std::vector<int> degree;
  std::vector<double> base_torsion;
  std::vector<int> children;

  pos.push_back({0.0, 0.0, 0.0});
  parent.push_back(-1);
  pos.push_back({bond_dist(rng), 0.0, 0.0});
  parent.push_back(0);
  r.bonds.push_back({0, 1, BondOrder::kSingle});
  degree = {1, 1};
  children = {1, 0};
  base_torsion = {torsion_dist(rng), torsion_dist(rng)};

  for (int i = 2; i < n; ++i) {
    std::vector<int> hosts;
    for (int a = 0; a < i; ++a) {
      if (degree[a] < 3) hosts.push_back(a);
    }
    const int host = hosts[std::uniform_int_distribution<std::size_t>(0, hosts.size() - 1)(rng)];
    // Frame: c = host, b = a placed neighbour of c, a = a placed neighbour of b
    // other than c (or an off-axis dummy point).
    const int b = parent[host] >= 0 ? parent[host] : 1;
    int a = -1;
    if (parent[b] >= 0 && parent[b] != host) {
      a = parent[b];
    } else {
      for (const auto& bond : r.bonds) {
        const int other = bond.i == b ? bond.j : (bond.j == b ? bond.i : -1);
        if (other >= 0 && other != host) {
          a = other;
          break;
        }
      }
    }
    const Vec3 a_pos = a >= 0 ? pos[a] : Vec3{pos[b][0], pos[b][1] + 1.0, pos[b][2] + 0.3};
    // Siblings hang roughly 120 degrees apart around the host bond.
    const double torsion =
        base_torsion[host] + children[host] * 2.0 * kPi / 3.0 + jitter(rng);
    pos.push_back(place_atom(a_pos, pos[b], pos[host], bond_dist(rng), angle_dist(rng), torsion));
    parent.push_back(host);
    r.bonds.push_back({host, i, BondOrder::kSingle});
    ++degree[host];
    degree.push_back(1);
    ++children[host];
    children.push_back(0);
    base_torsion.push_back(torsion_dist(rng));
  }
  for (const auto& p : pos) r.atoms.push_back({"C", p});
  return r;
}

double alcohol_target(const MoleculeRecord& r) {
  FeaturizerConfig config;
  config.vocabulary = {"C", "N", "O"};
  const Graph g = build_graph(r, config);
  return static_cast<double>(detect_alcohol(g, HydrogenMode::kHeavyAtom).size());
}

double dihedral_target(const MoleculeRecord& r) {
  FeaturizerConfig config;
  config.vocabulary = {"C"};
  const Graph g = build_graph(r, config);
  EnumerationOptions exact;
  exact.exact_length_only = true;
  double total = 0.0;
  for (int v = 0; v < g.num_nodes(); ++v) {
    for (const Path& p : enumerate_paths(g, v, 3, exact)) {
      if (p.nodes.front() > p.nodes.back()) continue;  // each undirected path once
      total += *geometry_path_features(g, p).dihedral_cos;
    }
  }
  return total;
}

}  // namespace

Vec3 place_atom(const Vec3& a, const Vec3& b, const Vec3& c, double bond, double angle,
                double torsion) {
  const Vec3 bc = normalized(minus(c, b));
  const Vec3 n = normalized(cross(minus(b, a), bc));
  const Vec3 m = cross(n, bc);
  const double x = -bond * std::cos(angle);
  const double y = bond * std::sin(angle) * std::cos(torsion);
  const double z = bond * std::sin(angle) * std::sin(torsion);
  return {c[0] + x * bc[0] + y * m[0] + z * n[0], c[1] + x * bc[1] + y * m[1] + z * n[1],
          c[2] + x * bc[2] + y * m[2] + z * n[2]};
}

SynthTask parse_synth_task(std::string_view text) {
  if (text == "alcohol-count") return SynthTask::kAlcoholCount;
  if (text == "dihedral-sum") return SynthTask::kDihedralSum;
  throw ValidationError("unknown synthetic task '" + std::string(text) + "'");
}

std::string_view to_string(SynthTask task) {
  return task == SynthTask::kAlcoholCount ? "alcohol-count" : "dihedral-sum";
}

MoleculeDataset generate_alcohol_count(int count, std::uint64_t seed) {
  if (count < 0) throw ValidationError("molecule count must be >= 0");
  std::mt19937_64 rng(seed);
  MoleculeDataset out;
  out.vocabulary = {"C", "N", "O"};
  out.target_names = {"alcohol_count"};
  for (int i = 0; i < count; ++i) {
    MoleculeRecord r = random_alcohol_molecule(i, rng);
    r.targets = {alcohol_target(r)};
    out.records.push_back(std::move(r));
  }
  return out;
}

MoleculeDataset generate_dihedral_sum(int count, std::uint64_t seed) {
  if (count < 0) throw ValidationError("molecule count must be >= 0");
  std::mt19937_64 rng(seed);
  MoleculeDataset out;
  out.vocabulary = {"C"};
  out.target_names = {"dihedral_cos_sum"};
  for (int i = 0; i < count; ++i) {
    MoleculeRecord r = random_dihedral_molecule(i, rng);
    r.targets = {dihedral_target(r)};
    out.records.push_back(std::move(r));
  }
  return out;
}

MoleculeDataset generate_synthetic(SynthTask task, int count, std::uint64_t seed) {
  return task == SynthTask::kAlcoholCount ? generate_alcohol_count(count, seed)
                                          : generate_dihedral_sum(count, seed);
}

}  // namespace pmpnn
