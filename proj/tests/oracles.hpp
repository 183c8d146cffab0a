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

// Reference implementations used only by the tests. They deliberately take a
// different route from the library code they check.

#ifndef PATHMPNN_TESTS_ORACLES_HPP_
#define PATHMPNN_TESTS_ORACLES_HPP_

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "pathmpnn/chem.hpp"
#include "pathmpnn/graph.hpp"

namespace oracle {

using pmpnn::Graph;
using pmpnn::Vec3;

inline Graph erdos_renyi(int n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (coin(rng)) edges.emplace_back(u, v);
    }
  }
  return Graph(n, edges);
}

inline std::vector<std::uint32_t> neighbour_masks(const Graph& g) {
  std::vector<std::uint32_t> adj(g.num_nodes(), 0);
  for (int v = 0; v < g.num_nodes(); ++v) {
    for (int w : g.neighbors(v)) adj[v] |= 1u << w;
  }
  return adj;
}

// Bitmask dynamic programme over (visited set, end node). counts[k] is the
// number of simple paths with k edges that start at v.
inline std::vector<std::int64_t> path_counts(const Graph& g, int v, int max_length) {
  const int n = g.num_nodes();
  const auto adj = neighbour_masks(g);
  std::vector<std::int64_t> counts(max_length + 1, 0);
  std::vector<std::vector<std::int64_t>> ways(1u << n, std::vector<std::int64_t>(n, 0));
  ways[1u << v][v] = 1;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const int k = std::popcount(mask) - 1;
    if (k < 0 || k >= max_length) continue;
    for (int end = 0; end < n; ++end) {
      if (ways[mask][end] == 0) continue;
      for (int w = 0; w < n; ++w) {
        if ((adj[end] >> w & 1u) && !(mask >> w & 1u)) {
          ways[mask | 1u << w][w] += ways[mask][end];
          counts[k + 1] += ways[mask][end];
        }
      }
    }
  }
  return counts;
}

// flags[v][s - 3] = 1 iff v lies on a simple cycle of exactly s nodes. Found
// by Held-Karp style Hamiltonian-cycle detection over every node subset.
inline std::vector<pmpnn::RingFlags> ring_flags(const Graph& g) {
  const int n = g.num_nodes();
  const auto adj = neighbour_masks(g);
  std::vector<pmpnn::RingFlags> flags(n, pmpnn::RingFlags{});
  for (int start = 0; start < n; ++start) {
    // Paths from `start` through nodes with larger index only.
    std::vector<std::uint32_t> reach(1u << n, 0);  // bit e: some path ends at e
    reach[1u << start] = 1u << start;
    for (std::uint32_t mask = 1u << start; mask < (1u << n); ++mask) {
      if (!(mask >> start & 1u) || (mask & ((1u << start) - 1)) || reach[mask] == 0) continue;
      const int size = std::popcount(mask);
      for (int end = 0; end < n; ++end) {
        if (!(reach[mask] >> end & 1u)) continue;
        if (size >= 3 && size <= pmpnn::kMaxRingSize && (adj[end] >> start & 1u)) {
          for (int x = 0; x < n; ++x) {
            if (mask >> x & 1u) {
              flags[x][size - pmpnn::kMinRingSize] = 1;
              flags[x][pmpnn::kAnyRingFlag] = 1;
            }
          }
        }
        if (size >= pmpnn::kMaxRingSize) continue;
        for (int w = start + 1; w < n; ++w) {
          if ((adj[end] >> w & 1u) && !(mask >> w & 1u)) reach[mask | 1u << w] |= 1u << w;
        }
      }
    }
  }
  return flags;
}

// Hydroxyl oxygens by the heavy-atom convention: O with one neighbour, which is
// a carbon joined by a single bond.
inline std::vector<int> hydroxyl_oxygens(const Graph& g) {
  std::vector<int> out;
  for (int v = 0; v < g.num_nodes(); ++v) {
    if (g.elements()[v] != "O" || g.degree(v) != 1) continue;
    const int c = g.neighbors(v)[0];
    if (g.elements()[c] == "C" && g.bond_orders()[g.edge_id(v, c)] == pmpnn::BondOrder::kSingle) {
      out.push_back(v);
    }
  }
  return out;
}

using Mat3 = std::array<std::array<double, 3>, 3>;

// Proper rotation from Gram-Schmidt (QR) of a Gaussian matrix, sign-fixed to
// det = +1.
inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Mat3 q{};
  for (auto& row : q) {
    for (double& x : row) x = gauss(rng);
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < i; ++j) {
      double d = 0;
      for (int k = 0; k < 3; ++k) d += q[i][k] * q[j][k];
      for (int k = 0; k < 3; ++k) q[i][k] -= d * q[j][k];
    }
    double norm = 0;
    for (int k = 0; k < 3; ++k) norm += q[i][k] * q[i][k];
    norm = std::sqrt(norm);
    for (int k = 0; k < 3; ++k) q[i][k] /= norm;
  }
  const double det = q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) -
                     q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0]) +
                     q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
  if (det < 0) {
    for (double& x : q[2]) x = -x;
  }
  return q;
}

inline Vec3 apply(const Mat3& r, const Vec3& p, const Vec3& shift = {0, 0, 0}) {
  Vec3 out{};
  for (int i = 0; i < 3; ++i) out[i] = r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2] + shift[i];
  return out;
}

// Dihedral from the textbook projection formula, independent of the library's
// plane-normal formulation.
inline double dihedral(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  auto sub = [](const Vec3& x, const Vec3& y) { return Vec3{x[0] - y[0], x[1] - y[1], x[2] - y[2]}; };
  auto dot = [](const Vec3& x, const Vec3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; };
  auto cross = [](const Vec3& x, const Vec3& y) {
    return Vec3{x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
  };
  const Vec3 b0 = sub(a, b);
  Vec3 b1 = sub(c, b);
  const Vec3 b2 = sub(d, c);
  const double n1 = std::sqrt(dot(b1, b1));
  for (double& x : b1) x /= n1;
  const double p0 = dot(b0, b1);
  const double p2 = dot(b2, b1);
  const Vec3 v = {b0[0] - p0 * b1[0], b0[1] - p0 * b1[1], b0[2] - p0 * b1[2]};
  const Vec3 w = {b2[0] - p2 * b1[0], b2[1] - p2 * b1[1], b2[2] - p2 * b1[2]};
  return std::atan2(dot(cross(b1, v), w), dot(v, w));
}

}  // namespace oracle

#endif  // PATHMPNN_TESTS_ORACLES_HPP_
