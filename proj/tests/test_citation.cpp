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
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "pathmpnn/citation.hpp"
#include "pathmpnn/error.hpp"
#include "pathmpnn/paths.hpp"

using namespace pmpnn;

namespace {

CitationGraph toy(int n, const std::vector<std::pair<int, int>>& edges, int features, std::uint64_t seed) {
  CitationGraph data;
  data.graph = Graph(n, edges);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution bit(0.4);
  std::vector<double> x(static_cast<std::size_t>(n) * features);
  for (double& v : x) v = bit(rng) ? 1.0 : 0.0;
  data.graph.set_node_features(features, x);
  std::vector<int> labels(n);
  for (int v = 0; v < n; ++v) labels[v] = v % 2;
  data.graph.set_labels(labels);
  data.class_names = {"a", "b"};
  for (int v = 0; v < n; ++v) data.node_ids.push_back(std::to_string(v));
  return data;
}

double weight(const NormalizedAdjacency& a, int v, int w) {
  for (std::size_t i = 0; i < a.receivers.size(); ++i) {
    if (a.receivers[i] == v && a.senders[i] == w) return a.weights[i];
  }
  return 0.0;
}

PathGcnConfig path_config(int per_hop) {
  PathGcnConfig c;
  c.hidden_dim = 5;
  c.max_path_length = 3;
  c.per_hop = per_hop;
  c.dropout = 0.0;
  c.eval_samples = 4;
  c.seed = 3;
  return c;
}

Tensor run(const PathGcn& model, const CitationGraph& data, std::uint64_t sample_seed) {
  return model.predict(citation_features(data), data.graph, normalize_adjacency(data.graph), sample_seed);
}

}  // namespace

TEST_CASE("normalised adjacency examples") {
  const auto single = normalize_adjacency(Graph(1, {}));
  REQUIRE(single.weights.size() == 1);
  CHECK(single.weights[0] == 1.0);
  const auto pair = normalize_adjacency(Graph(2, {{0, 1}}));
  CHECK(weight(pair, 0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(weight(pair, 0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(weight(pair, 1, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("regular graphs have unit row sums") {
  std::vector<std::pair<int, int>> cycle;
  for (int i = 0; i < 7; ++i) cycle.emplace_back(i, (i + 1) % 7);
  const auto a = normalize_adjacency(Graph(7, cycle));
  std::vector<double> rows(7, 0.0);
  for (std::size_t i = 0; i < a.weights.size(); ++i) rows[a.receivers[i]] += a.weights[i];
  for (double r : rows) CHECK(r == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    CHECK(a.weights[i] > 0.0);
    CHECK(weight(a, a.senders[i], a.receivers[i]) == a.weights[i]);
  }
}

TEST_CASE("gcn layer with identity adjacency is a dense map") {
  NormalizedAdjacency eye;
  eye.num_nodes = 3;
  eye.receivers = {0, 1, 2};
  eye.senders = {0, 1, 2};
  eye.weights = {1.0, 1.0, 1.0};
  std::mt19937_64 rng(1);
  ParameterSet p;
  const Dense layer{p.add_weight("W", 4, 2, rng), p.add_weight("b", 1, 2, rng)};
  const Tensor x = Tensor::constant({3, 4}, {1, 0, 1, 0, 0, 1, 1, 1, 0, 0, 0, 1});
  const Tensor out = gcn_layer(x, eye, layer, false);
  const Tensor want = layer.apply(x);
  CHECK(out.shape() == Shape{3, 2});
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out.values()[i] == doctest::Approx(want.values()[i]).epsilon(1e-15));
}

TEST_CASE("path features concatenate hop states") {
  const Tensor h = Tensor::constant({4, 2}, {0, 1, 2, 3, 4, 5, 6, 7});
  const Tensor one = citation_path_features(h, Path{{0, 1}});
  CHECK(one.shape() == Shape{1, 2});
  CHECK(one.at(0, 0) == 2.0);
  const Tensor three = citation_path_features(h, Path{{0, 1, 2, 3}});
  CHECK(three.shape() == Shape{1, 6});
  CHECK(std::vector<double>(three.values().begin(), three.values().end()) ==
        std::vector<double>{2, 3, 4, 5, 6, 7});
}

TEST_CASE("zero budget reduces to plain gcn bit for bit") {
  const CitationGraph data = toy(9, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {2, 6}, {6, 7}, {7, 8}}, 6, 2);
  const PathGcn reduced(path_config(0), 6, 2);
  std::mt19937_64 unused(0);
  const Tensor a = run(reduced, data, 11);
  const Tensor b = gcn_forward(reduced.parameters(), citation_features(data), normalize_adjacency(data.graph),
                               0.0, false, unused);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin(), b.values().end()));
  CHECK(a.shape() == Shape{9, 2});
  // plain parameters are shared with the path model under the same seed
  const PathGcn full(path_config(1), 6, 2);
  for (const char* name : {"l1.gcn.W", "l1.gcn.b", "l2.gcn.W", "l2.gcn.b"}) {
    const auto x = reduced.parameters().get(name).values();
    const auto y = full.parameters().get(name).values();
    CHECK(std::equal(x.begin(), x.end(), y.begin(), y.end()));
  }
}

TEST_CASE("fixed seed gives fixed logits") {
  const CitationGraph data = toy(8, {{0, 1}, {1, 2}, {2, 3}, {0, 4}, {4, 5}, {5, 6}, {6, 7}, {1, 5}}, 5, 3);
  const PathGcn model(path_config(1), 5, 2);
  const Tensor a = run(model, data, 77);
  const Tensor b = run(model, data, 77);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin(), b.values().end()));
}

TEST_CASE("star leaves hear about their siblings in one layer") {
  const Graph star(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const auto adj = normalize_adjacency(star);
  std::mt19937_64 rng(4);
  const SampledPaths paths = sample_citation_paths(star, adj, path_config(1), rng);
  REQUIRE(!paths.groups.empty());
  const auto& two = paths.groups[0];
  CHECK(two.length == 2);
  std::set<int> leaf_roots;
  for (std::size_t i = 0; i < two.roots.size(); ++i) {
    const int root = two.roots[i];
    if (root == 0) continue;
    leaf_roots.insert(root);
    const int end = two.hops[1][i];
    CHECK(end != 0);
    CHECK(end != root);  // a sibling leaf
    CHECK(two.weights[i] == doctest::Approx(weight(adj, root, 0)).epsilon(1e-15));
  }
  CHECK(leaf_roots.size() == 4);
  // a plain gcn layer only mixes each leaf with the centre
  for (std::size_t i = 0; i < adj.receivers.size(); ++i) {
    if (adj.receivers[i] != 0) CHECK((adj.senders[i] == 0 || adj.senders[i] == adj.receivers[i]));
  }
}

TEST_CASE("three-hop perturbation reaches the root only with paths") {
  // On a 4-node chain node 3 is three hops from node 0; two plain GCN layers
  // cannot see it, a path layer with length-3 paths can.
  CitationGraph data = toy(4, {{0, 1}, {1, 2}, {2, 3}}, 4, 5);
  CitationGraph changed = data;
  std::vector<double> x = data.graph.node_feature_matrix();
  for (int j = 0; j < 4; ++j) x[3 * 4 + j] = 1.0 - x[3 * 4 + j];
  changed.graph.set_node_features(4, x);
  const PathGcn plain(path_config(0), 4, 2);
  const PathGcn path(path_config(1), 4, 2);
  CHECK(run(plain, data, 1).at(0, 0) == run(plain, changed, 1).at(0, 0));
  CHECK(run(path, data, 1).at(0, 0) != run(path, changed, 1).at(0, 0));
}

TEST_CASE("config and data validation") {
  PathGcnConfig c;
  c.dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = PathGcnConfig{};
  c.per_hop = -1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CitationGraph data = toy(6, {{0, 1}, {1, 2}}, 3, 1);
  data.train = {0, 1};
  data.val = {1};
  CHECK_THROWS_AS(data.validate(), ValidationError);
}

TEST_CASE("split assignment") {
  CitationGraph data = toy(40, {{0, 1}}, 3, 1);
  assign_splits(data, 5, 10, 15, 9);
  CHECK(data.train.size() == 10);
  CHECK(data.val.size() == 10);
  CHECK(data.test.size() == 15);
  data.validate();
  int per[2] = {0, 0};
  for (int v : data.train) ++per[data.graph.labels()[v]];
  CHECK(per[0] == 5);
  CHECK(per[1] == 5);
  CitationGraph again = toy(40, {{0, 1}}, 3, 1);
  assign_splits(again, 5, 10, 15, 9);
  CHECK(again.test == data.test);
  CHECK_THROWS_AS(assign_splits(again, 5, 30, 30, 9), ValidationError);
}
