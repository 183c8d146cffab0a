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

#include "pathmpnn/paths.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "pathmpnn/error.hpp"

namespace pmpnn {

namespace {

void check_root(const Graph& graph, int v, int max_length) {
  if (v < 0 || v >= graph.num_nodes()) {
    throw ValidationError("root node " + std::to_string(v) + " out of range for " +
                          std::to_string(graph.num_nodes()) + " nodes");
  }
  if (max_length < 1) {
    throw ValidationError("path length must be >= 1, got " + std::to_string(max_length));
  }
}

bool contains(const std::vector<int>& nodes, int w) {
  return std::find(nodes.begin(), nodes.end(), w) != nodes.end();
}

class Enumerator {
 public:
  Enumerator(const Graph& graph, int max_length, const EnumerationOptions& options)
      : graph_(graph), max_length_(max_length), options_(options) {}

  void run(int v) {
    current_.push_back(v);
    extend();
  }

  std::vector<Path> take() { return std::move(out_); }

 private:
  void extend() {
    const int last = current_.back();
    for (int w : graph_.neighbors(last)) {
      if (contains(current_, w)) continue;
      current_.push_back(w);
      const int length = static_cast<int>(current_.size()) - 1;
      if (!options_.exact_length_only || length == max_length_) emit();
      if (length < max_length_) extend();
      current_.pop_back();
    }
  }

  void emit() {
    if (out_.size() >= options_.max_paths) {
      throw PathLimitError("more than " + std::to_string(options_.max_paths) +
                           " simple paths rooted at node " +
                           std::to_string(current_.front()) +
                           "; use path sampling for graphs this dense");
    }
    out_.push_back(Path{current_});
  }

  const Graph& graph_;
  int max_length_;
  const EnumerationOptions& options_;
  std::vector<int> current_;
  std::vector<Path> out_;
};

// Number of simple paths rooted at v with length 1..max_length, stopping early
// once `limit` is exceeded.
std::size_t count_up_to(const Graph& graph, std::vector<int>& current, int max_length,
                        std::size_t limit, std::size_t count) {
  for (int w : graph.neighbors(current.back())) {
    if (count > limit) return count;
    if (contains(current, w)) continue;
    ++count;
    if (static_cast<int>(current.size()) < max_length) {
      current.push_back(w);
      count = count_up_to(graph, current, max_length, limit, count);
      current.pop_back();
    }
  }
  return count;
}

}  // namespace

bool is_simple_path(const Graph& graph, const Path& path) {
  if (path.nodes.size() < 2) return false;
  std::set<int> seen;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    const int v = path.nodes[i];
    if (v < 0 || v >= graph.num_nodes() || !seen.insert(v).second) return false;
    if (i > 0 && !graph.has_edge(path.nodes[i - 1], v)) return false;
  }
  return true;
}

std::vector<Path> enumerate_paths(const Graph& graph, int v, int max_length,
                                  const EnumerationOptions& options) {
  check_root(graph, v, max_length);
  Enumerator enumerator(graph, max_length, options);
  enumerator.run(v);
  return enumerator.take();
}

std::vector<std::int64_t> count_paths_oracle(const Graph& graph, int v, int max_length) {
  check_root(graph, v, max_length);
  const int n = graph.num_nodes();
  std::vector<std::int64_t> counts(max_length + 1, 0);
  for (int k = 1; k <= max_length; ++k) {
    // Odometer over every sequence (v, s_1, ..., s_k) with s_i in [0, n).
    std::vector<int> digits(k, 0);
    while (true) {
      bool ok = true;
      int prev = v;
      for (int i = 0; i < k && ok; ++i) {
        const int s = digits[i];
        ok = graph.has_edge(prev, s) && s != v;
        for (int j = 0; j < i && ok; ++j) ok = digits[j] != s;
        prev = s;
      }
      if (ok) ++counts[k];
      int pos = k - 1;
      while (pos >= 0 && ++digits[pos] == n) digits[pos--] = 0;
      if (pos < 0) break;
    }
  }
  return counts;
}

std::vector<Path> sample_paths(const Graph& graph, int v, int max_length, int budget,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_paths(graph, v, max_length, budget, rng);
}

std::vector<Path> sample_paths(const Graph& graph, int v, int max_length, int budget,
                               std::mt19937_64& rng) {
  check_root(graph, v, max_length);
  if (budget < 1) throw ValidationError("sampling budget must be >= 1");

  std::vector<int> scratch{v};
  const std::size_t total =
      count_up_to(graph, scratch, max_length, static_cast<std::size_t>(budget), 0);
  if (total <= static_cast<std::size_t>(budget)) {
    return enumerate_paths(graph, v, max_length);
  }

  std::set<Path> walks;
  std::vector<int> admissible;
  for (int b = 0; b < budget; ++b) {
    Path walk{{v}};
    while (walk.length() < max_length) {
      admissible.clear();
      for (int w : graph.neighbors(walk.nodes.back())) {
        if (!contains(walk.nodes, w)) admissible.push_back(w);
      }
      if (admissible.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, admissible.size() - 1);
      walk.nodes.push_back(admissible[pick(rng)]);
    }
    if (walk.length() >= 1) walks.insert(std::move(walk));
  }
  return {walks.begin(), walks.end()};
}

std::vector<Path> sample_neighbor_extensions(const Graph& graph, int v, int max_length,
                                             int per_hop, std::mt19937_64& rng) {
  check_root(graph, v, max_length);
  if (per_hop < 0) throw ValidationError("per-hop sample count must be >= 0");

  std::vector<Path> out;
  std::vector<int> admissible;
  // Frontier of partial paths that may still be extended.
  for (int w : graph.neighbors(v)) {
    std::vector<Path> frontier{Path{{v, w}}};
    out.push_back(frontier.front());
    for (int length = 2; length <= max_length && per_hop > 0; ++length) {
      std::vector<Path> next;
      for (const Path& partial : frontier) {
        admissible.clear();
        for (int y : graph.neighbors(partial.nodes.back())) {
          if (!contains(partial.nodes, y)) admissible.push_back(y);
        }
        if (admissible.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, admissible.size() - 1);
        for (int s = 0; s < per_hop; ++s) {
          Path extended = partial;
          extended.nodes.push_back(admissible[pick(rng)]);
          out.push_back(extended);
          next.push_back(std::move(extended));
        }
      }
      frontier = std::move(next);
    }
  }
  return out;
}

}  // namespace pmpnn
