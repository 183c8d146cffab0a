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

#ifndef PATHMPNN_CITATION_HPP_
#define PATHMPNN_CITATION_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pathmpnn/graph.hpp"
#include "pathmpnn/model.hpp"
#include "pathmpnn/optim.hpp"
#include "pathmpnn/paths.hpp"
#include "pathmpnn/tensor.hpp"

namespace pmpnn {

// Citation network: topology, binary bag-of-words node features, one class per
// node and disjoint train/val/test node sets.
struct CitationGraph {
  Graph graph;
  std::vector<std::string> node_ids;
  std::vector<std::string> class_names;
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
  int dropped_citations = 0;
  int duplicate_citations = 0;

  int num_nodes() const { return graph.num_nodes(); }
  int num_classes() const { return static_cast<int>(class_names.size()); }
  // Binary features, labels in range, disjoint splits. Throws ValidationError.
  void validate() const;
};

// Seeded split: `per_class` training nodes of every class, then `val` and
// `test` nodes drawn from the remainder.
void assign_splits(CitationGraph& data, int per_class, int val, int test, std::uint64_t seed);

// A = D^{-1/2} (A + I) D^{-1/2} as a receiver/sender/weight edge list that
// includes every self loop.
struct NormalizedAdjacency {
  int num_nodes = 0;
  std::vector<int> receivers;
  std::vector<int> senders;
  std::vector<double> weights;
};

NormalizedAdjacency normalize_adjacency(const Graph& graph);

// act((A H) W + b), computed as A (H W) + b. relu when `hidden`, identity
// otherwise.
Tensor gcn_layer(const Tensor& states, const NormalizedAdjacency& adjacency, const Dense& layer,
                 bool hidden);

// Concatenated states [h_{v1}, ..., h_{vk}] of the non-root path nodes. Citation
// edges carry no features, so nothing else is appended.
Tensor citation_path_features(const Tensor& states, const Path& path);

struct PathGcnConfig {
  int hidden_dim = 16;
  // Longest sampled path; 1 disables path messages.
  int max_path_length = 3;
  // Sampled extensions per hop for each first-order neighbour; 0 disables.
  int per_hop = 1;
  double dropout = 0.5;
  // Resample higher-order paths every epoch instead of fixing them once.
  bool resample_each_epoch = true;
  // Logits are averaged over this many path samples at evaluation time.
  int eval_samples = 8;
  std::uint64_t seed = 0;

  void validate() const;
  bool uses_paths() const { return per_hop > 0 && max_path_length > 1; }
};

// Sampled higher-order paths (length >= 2) grouped by length, each weighted by
// the normalised adjacency weight of its first hop.
struct SampledPaths {
  struct Group {
    int length = 0;
    std::vector<int> roots;
    std::vector<std::vector<int>> hops;
    std::vector<double> weights;
  };
  std::vector<Group> groups;  // groups[k - 2] holds length k
};

SampledPaths sample_citation_paths(const Graph& graph, const NormalizedAdjacency& adjacency,
                                   const PathGcnConfig& config, std::mt19937_64& rng);

// Two-layer path-GCN. Each layer adds, to the plain GCN aggregation, the sum
// over sampled paths of [h_{v1}, ..., h_{vk}] W_k, weighted per path.
class PathGcn {
 public:
  PathGcn(PathGcnConfig config, int num_features, int num_classes);

  const PathGcnConfig& config() const { return config_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }

  // Class logits [n, classes]. `dropout_rng` is only used when training.
  Tensor forward(const Tensor& features, const NormalizedAdjacency& adjacency,
                 const SampledPaths* paths, bool training, std::mt19937_64& dropout_rng) const;
  // Deterministic evaluation logits: no dropout, averaged over
  // config.eval_samples path samples drawn from `sample_seed`.
  Tensor predict(const Tensor& features, const Graph& graph,
                 const NormalizedAdjacency& adjacency, std::uint64_t sample_seed) const;

 private:
  Tensor layer(int index, const Tensor& states, const NormalizedAdjacency& adjacency,
               const SampledPaths* paths) const;

  PathGcnConfig config_;
  ParameterSet params_;
};

// Plain two-layer GCN logits with the same parameter layout as PathGcn.
Tensor gcn_forward(const ParameterSet& params, const Tensor& features,
                   const NormalizedAdjacency& adjacency, double dropout, bool training,
                   std::mt19937_64& dropout_rng);

Tensor citation_features(const CitationGraph& data);

}  // namespace pmpnn

#endif  // PATHMPNN_CITATION_HPP_
