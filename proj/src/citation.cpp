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

#include "pathmpnn/citation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "pathmpnn/error.hpp"

namespace pmpnn {

namespace {

Tensor gcn_preactivation(const Tensor& states, const NormalizedAdjacency& adjacency,
                         const Dense& layer) {
  const Tensor projected = matmul(states, layer.weight);
  const Tensor aggregated = segment_sum(gather_rows(projected, adjacency.senders),
                                        adjacency.receivers, adjacency.num_nodes,
                                        adjacency.weights);
  return add(aggregated, layer.bias);
}

std::string path_param(int layer, int length, int position) {
  return "l" + std::to_string(layer) + ".path" + std::to_string(length) + "." +
         std::to_string(position) + ".W";
}

}  // namespace

void CitationGraph::validate() const {
  const int n = graph.num_nodes();
  for (double x : graph.node_feature_matrix()) {
    if (x != 0.0 && x != 1.0) throw ValidationError("citation features must be binary");
  }
  if (static_cast<int>(graph.labels().size()) != n) {
    throw ValidationError("every citation node needs exactly one label");
  }
  for (int label : graph.labels()) {
    if (label < 0 || label >= num_classes()) throw ValidationError("label out of range");
  }
  std::set<int> seen;
  for (const auto* split : {&train, &val, &test}) {
    for (int v : *split) {
      if (v < 0 || v >= n) throw ValidationError("split index out of range");
      if (!seen.insert(v).second) throw ValidationError("splits overlap at node " + std::to_string(v));
    }
  }
}

void assign_splits(CitationGraph& data, int per_class, int val, int test, std::uint64_t seed) {
  const int n = data.num_nodes();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  data.train.clear();
  data.val.clear();
  data.test.clear();
  std::vector<int> taken(data.num_classes(), 0);
  std::vector<int> rest;
  for (int v : order) {
    const int label = data.graph.labels()[v];
    if (taken[label] < per_class) {
      ++taken[label];
      data.train.push_back(v);
    } else {
      rest.push_back(v);
    }
  }
  if (static_cast<int>(rest.size()) < val + test) {
    throw ValidationError("not enough nodes for the requested validation/test sizes");
  }
  data.val.assign(rest.begin(), rest.begin() + val);
  data.test.assign(rest.begin() + val, rest.begin() + val + test);
  std::sort(data.train.begin(), data.train.end());
  std::sort(data.val.begin(), data.val.end());
  std::sort(data.test.begin(), data.test.end());
}

NormalizedAdjacency normalize_adjacency(const Graph& graph) {
  NormalizedAdjacency out;
  out.num_nodes = graph.num_nodes();
  auto inv_sqrt_degree = [&](int v) { return 1.0 / std::sqrt(graph.degree(v) + 1.0); };
  for (int v = 0; v < graph.num_nodes(); ++v) {
    // Self loop first, then neighbours in ascending order.
    out.receivers.push_back(v);
    out.senders.push_back(v);
    out.weights.push_back(inv_sqrt_degree(v) * inv_sqrt_degree(v));
    for (int w : graph.neighbors(v)) {
      out.receivers.push_back(v);
      out.senders.push_back(w);
      out.weights.push_back(inv_sqrt_degree(v) * inv_sqrt_degree(w));
    }
  }
  return out;
}

Tensor gcn_layer(const Tensor& states, const NormalizedAdjacency& adjacency, const Dense& layer,
                 bool hidden) {
  const Tensor pre = gcn_preactivation(states, adjacency, layer);
  return hidden ? relu(pre) : pre;
}

Tensor citation_path_features(const Tensor& states, const Path& path) {
  if (path.length() < 1) throw ValidationError("path needs at least one edge");
  std::vector<Tensor> parts;
  for (std::size_t i = 1; i < path.nodes.size(); ++i) {
    const int node = path.nodes[i];
    parts.push_back(gather_rows(states, std::span<const int>(&node, 1)));
  }
  return concat(parts, 1);
}

void PathGcnConfig::validate() const {
  if (hidden_dim < 1) throw ValidationError("hidden_dim must be positive");
  if (max_path_length < 1) throw ValidationError("max_path_length must be >= 1");
  if (per_hop < 0) throw ValidationError("per_hop must be >= 0");
  if (dropout < 0.0 || dropout >= 1.0) throw ValidationError("dropout must lie in [0, 1)");
  if (eval_samples < 1) throw ValidationError("eval_samples must be >= 1");
}

SampledPaths sample_citation_paths(const Graph& graph, const NormalizedAdjacency& adjacency,
                                   const PathGcnConfig& config, std::mt19937_64& rng) {
  SampledPaths out;
  if (!config.uses_paths()) return out;
  for (int k = 2; k <= config.max_path_length; ++k) {
    SampledPaths::Group group;
    group.length = k;
    group.hops.resize(k);
    out.groups.push_back(std::move(group));
  }
  // First-hop weight lookup: the adjacency lists each receiver's self loop,
  // then its neighbours in graph order.
  std::vector<std::size_t> row_start(graph.num_nodes() + 1, 0);
  for (int v = 0; v < graph.num_nodes(); ++v) row_start[v + 1] = row_start[v] + graph.degree(v) + 1;
  for (int v = 0; v < graph.num_nodes(); ++v) {
    const auto& nbrs = graph.neighbors(v);
    for (const Path& path : sample_neighbor_extensions(graph, v, config.max_path_length,
                                                       config.per_hop, rng)) {
      const int k = path.length();
      if (k < 2) continue;
      auto& group = out.groups[k - 2];
      group.roots.push_back(v);
      for (int i = 0; i < k; ++i) group.hops[i].push_back(path.nodes[i + 1]);
      const auto pos = std::lower_bound(nbrs.begin(), nbrs.end(), path.nodes[1]) - nbrs.begin();
      group.weights.push_back(adjacency.weights[row_start[v] + 1 + pos]);
    }
  }
  return out;
}

PathGcn::PathGcn(PathGcnConfig config, int num_features, int num_classes)
    : config_(config) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  const int h = config_.hidden_dim;
  // Plain GCN parameters come first so both models share them under one seed.
  params_.add_weight("l1.gcn.W", num_features, h, rng);
  params_.add_zeros("l1.gcn.b", {1, h});
  params_.add_weight("l2.gcn.W", h, num_classes, rng);
  params_.add_zeros("l2.gcn.b", {1, num_classes});
  if (!config_.uses_paths()) return;
  for (int layer = 1; layer <= 2; ++layer) {
    const int in = layer == 1 ? num_features : h;
    const int out = layer == 1 ? h : num_classes;
    for (int k = 2; k <= config_.max_path_length; ++k) {
      for (int j = 0; j < k; ++j) {
        // Glorot over the full concatenated block [k * in, out].
        const double a = std::sqrt(6.0 / static_cast<double>(k * in + out));
        std::uniform_real_distribution<double> dist(-a, a);
        std::vector<double> values(static_cast<std::size_t>(in) * out);
        for (double& x : values) x = dist(rng);
        params_.add(path_param(layer, k, j), Tensor::parameter({in, out}, std::move(values)));
      }
    }
  }
}

Tensor PathGcn::layer(int index, const Tensor& states, const NormalizedAdjacency& adjacency,
                      const SampledPaths* paths) const {
  const std::string prefix = "l" + std::to_string(index) + ".gcn";
  Tensor out = gcn_preactivation(states, adjacency,
                                 {params_.get(prefix + ".W"), params_.get(prefix + ".b")});
  if (paths == nullptr || !config_.uses_paths()) return out;
  // [h_{v1}, ..., h_{vk}] W_k splits into sum_j h_{vj} W_{k,j}.
  for (const auto& group : paths->groups) {
    if (group.roots.empty()) continue;
    for (int j = 0; j < group.length; ++j) {
      const Tensor projected = matmul(states, params_.get(path_param(index, group.length, j)));
      out = add(out, segment_sum(gather_rows(projected, group.hops[j]), group.roots,
                                 adjacency.num_nodes, group.weights));
    }
  }
  return out;
}

Tensor PathGcn::forward(const Tensor& features, const NormalizedAdjacency& adjacency,
                        const SampledPaths* paths, bool training,
                        std::mt19937_64& dropout_rng) const {
  const double rate = training ? config_.dropout : 0.0;
  const Tensor hidden = relu(layer(1, dropout(features, rate, dropout_rng), adjacency, paths));
  return layer(2, dropout(hidden, rate, dropout_rng), adjacency, paths);
}

Tensor PathGcn::predict(const Tensor& features, const Graph& graph,
                        const NormalizedAdjacency& adjacency, std::uint64_t sample_seed) const {
  std::mt19937_64 unused(0);
  if (!config_.uses_paths()) return forward(features, adjacency, nullptr, false, unused);
  std::mt19937_64 rng(sample_seed);
  Tensor total;
  for (int s = 0; s < config_.eval_samples; ++s) {
    const SampledPaths paths = sample_citation_paths(graph, adjacency, config_, rng);
    const Tensor logits = forward(features, adjacency, &paths, false, unused);
    total = total.defined() ? add(total, logits) : logits;
  }
  return scale(total, 1.0 / config_.eval_samples);
}

Tensor gcn_forward(const ParameterSet& params, const Tensor& features,
                   const NormalizedAdjacency& adjacency, double dropout_rate, bool training,
                   std::mt19937_64& dropout_rng) {
  const double rate = training ? dropout_rate : 0.0;
  const Tensor hidden =
      gcn_layer(dropout(features, rate, dropout_rng), adjacency,
                {params.get("l1.gcn.W"), params.get("l1.gcn.b")}, true);
  return gcn_layer(dropout(hidden, rate, dropout_rng), adjacency,
                   {params.get("l2.gcn.W"), params.get("l2.gcn.b")}, false);
}

Tensor citation_features(const CitationGraph& data) {
  return Tensor::constant({data.num_nodes(), data.graph.node_feature_width()},
                          data.graph.node_feature_matrix());
}

}  // namespace pmpnn
