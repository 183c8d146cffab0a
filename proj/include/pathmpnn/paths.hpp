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

#ifndef PATHMPNN_PATHS_HPP_
#define PATHMPNN_PATHS_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "pathmpnn/graph.hpp"

namespace pmpnn {

// A simple path rooted at nodes.front(). Lengths count edges.
struct Path {
  std::vector<int> nodes;

  int root() const { return nodes.front(); }
  int length() const { return static_cast<int>(nodes.size()) - 1; }

  friend bool operator==(const Path&, const Path&) = default;
  friend auto operator<=>(const Path&, const Path&) = default;
};

// Consecutive nodes adjacent and no node repeated; length >= 1.
bool is_simple_path(const Graph& graph, const Path& path);

struct EnumerationOptions {
  // Only emit paths of length exactly max_length (ablation mode).
  bool exact_length_only = false;
  // Abort if a single root has more paths than this.
  std::size_t max_paths = 100000;
};

// All simple paths rooted at v with length 1..max_length, in lexicographic
// order of their node sequences. Throws PathLimitError past options.max_paths.
std::vector<Path> enumerate_paths(const Graph& graph, int v, int max_length,
                                  const EnumerationOptions& options = {});

// Exhaustive reference count: walks every node sequence of length <= max_length
// starting at v and keeps those that are adjacent and repeat-free.
// result[k] is the number of simple paths of length k; result[0] is unused.
std::vector<std::int64_t> count_paths_oracle(const Graph& graph, int v,
                                             int max_length);

// Random-walk sampler: each of `budget` walks extends the partial path by one
// uniformly chosen admissible neighbour per hop, stopping at max_length or at
// a dead end. Distinct walks are returned in lexicographic order. When budget
// covers every path rooted at v the full enumeration is returned instead.
std::vector<Path> sample_paths(const Graph& graph, int v, int max_length,
                               int budget, std::uint64_t seed);
std::vector<Path> sample_paths(const Graph& graph, int v, int max_length,
                               int budget, std::mt19937_64& rng);

// Neighbour-rooted sampler: every first-order path [v, w] is kept, and each is
// extended hop by hop with `per_hop` uniformly chosen admissible neighbours
// (per_hop = 1 keeps a single second- and third-order neighbour per w). Every
// intermediate prefix is emitted. per_hop = 0 yields only the length-1 paths.
std::vector<Path> sample_neighbor_extensions(const Graph& graph, int v,
                                             int max_length, int per_hop,
                                             std::mt19937_64& rng);

}  // namespace pmpnn

#endif  // PATHMPNN_PATHS_HPP_
