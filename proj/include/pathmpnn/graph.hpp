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

#ifndef PATHMPNN_GRAPH_HPP_
#define PATHMPNN_GRAPH_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pmpnn {

using Vec3 = std::array<double, 3>;

enum class BondOrder { kSingle = 0, kDouble = 1, kTriple = 2, kAromatic = 3 };

inline constexpr int kNumBondOrders = 4;

std::string_view to_string(BondOrder order);
// Throws ValidationError for anything other than single/double/triple/aromatic.
BondOrder parse_bond_order(std::string_view text);

struct Atom {
  std::string element;
  std::optional<Vec3> coords;
};

struct Bond {
  int i = 0;
  int j = 0;
  BondOrder order = BondOrder::kSingle;
};

struct MoleculeRecord {
  std::string id;
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::vector<double> targets;

  bool has_coords() const;
  // Checks index bounds, self bonds, duplicate bonds and coordinate
  // completeness. Throws ValidationError describing the first violation.
  void validate() const;
};

struct FeaturizerConfig {
  // Element one-hot vocabulary, normally taken from the dataset header.
  std::vector<std::string> vocabulary;
  bool explicit_hydrogens = false;
  // Append per-node ring-size flags (sizes 3..8 plus any-ring) to x_v.
  bool ring_flags = false;
};

// Undirected graph with dense node features and per-edge features. Edges are
// stored once; e_vw and e_wv resolve to the same row, so symmetry holds by
// construction. Immutable once built.
class Graph {
 public:
  struct Edge {
    int u = 0;
    int v = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
  };

  Graph() = default;
  // Topology only; node and edge feature widths are zero.
  Graph(int num_nodes, const std::vector<std::pair<int, int>>& edges);

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<int>& neighbors(int v) const { return adjacency_[v]; }
  int degree(int v) const { return static_cast<int>(adjacency_[v].size()); }
  bool has_edge(int v, int w) const { return edge_id(v, w) >= 0; }
  // Index of the undirected edge {v, w}, or -1.
  int edge_id(int v, int w) const;
  const Edge& edge(int id) const { return edges_[id]; }

  int node_feature_width() const { return node_width_; }
  int edge_feature_width() const { return edge_width_; }
  std::span<const double> node_features(int v) const;
  const std::vector<double>& node_feature_matrix() const { return node_features_; }
  std::span<const double> edge_features(int v, int w) const;
  std::span<const double> edge_features_by_id(int id) const;

  bool has_coords() const { return !coords_.empty(); }
  const Vec3& coords(int v) const { return coords_[v]; }
  const std::vector<Vec3>& all_coords() const { return coords_; }

  // Element symbols, empty for non-molecular graphs.
  const std::vector<std::string>& elements() const { return elements_; }
  // Bond order per edge id, empty for non-molecular graphs.
  const std::vector<BondOrder>& bond_orders() const { return bond_orders_; }
  const std::vector<int>& labels() const { return labels_; }

  void set_node_features(int width, std::vector<double> values);
  void set_edge_features(int width, std::vector<double> values);
  void set_coords(std::vector<Vec3> coords);
  void set_elements(std::vector<std::string> elements);
  void set_bond_orders(std::vector<BondOrder> orders);
  void set_labels(std::vector<int> labels);

  // Exhaustive check of mutual adjacency, sorted neighbor lists and feature
  // table sizes. Throws ValidationError.
  void check_invariants() const;

  friend bool operator==(const Graph& a, const Graph& b) = default;

 private:
  int num_nodes_ = 0;
  std::vector<std::vector<int>> adjacency_;
  std::vector<std::vector<int>> adjacency_edge_ids_;
  std::vector<Edge> edges_;
  int node_width_ = 0;
  std::vector<double> node_features_;
  int edge_width_ = 0;
  std::vector<double> edge_features_;
  std::vector<Vec3> coords_;
  std::vector<std::string> elements_;
  std::vector<BondOrder> bond_orders_;
  std::vector<int> labels_;
};

// Builds the molecular graph: x_v = element one-hot + degree (+ ring flags),
// e_vw = bond-order one-hot (+ bond length in Angstrom when coordinates exist).
// Hydrogens are dropped unless config.explicit_hydrogens is set.
Graph build_graph(const MoleculeRecord& record, const FeaturizerConfig& config);

// Width of x_v produced by build_graph for this config.
int atom_feature_width(const FeaturizerConfig& config);

// Lossless text form (JSON); doubles survive the round trip bit-exactly.
std::string serialize_graph(const Graph& graph);
Graph parse_graph(std::string_view text);

}  // namespace pmpnn

#endif  // PATHMPNN_GRAPH_HPP_
