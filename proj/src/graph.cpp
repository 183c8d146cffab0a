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

#include "pathmpnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pathmpnn/chem.hpp"
#include "pathmpnn/error.hpp"

namespace pmpnn {

namespace {

using nlohmann::json;

std::string record_label(const MoleculeRecord& record) {
  return record.id.empty() ? std::string("<unnamed>") : record.id;
}

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

std::string_view to_string(BondOrder order) {
  switch (order) {
    case BondOrder::kSingle:
      return "single";
    case BondOrder::kDouble:
      return "double";
    case BondOrder::kTriple:
      return "triple";
    case BondOrder::kAromatic:
      return "aromatic";
  }
  return "single";
}

BondOrder parse_bond_order(std::string_view text) {
  if (text == "single") return BondOrder::kSingle;
  if (text == "double") return BondOrder::kDouble;
  if (text == "triple") return BondOrder::kTriple;
  if (text == "aromatic") return BondOrder::kAromatic;
  throw ValidationError("unknown bond order '" + std::string(text) + "'");
}

bool MoleculeRecord::has_coords() const {
  return !atoms.empty() && atoms.front().coords.has_value();
}

void MoleculeRecord::validate() const {
  const int n = static_cast<int>(atoms.size());
  std::set<std::pair<int, int>> seen;
  for (const Bond& bond : bonds) {
    if (bond.i < 0 || bond.j < 0 || bond.i >= n || bond.j >= n) {
      throw ValidationError("molecule " + record_label(*this) +
                            ": dangling bond index (" + std::to_string(bond.i) +
                            ", " + std::to_string(bond.j) + ") with " +
                            std::to_string(n) + " atoms");
    }
    if (bond.i == bond.j) {
      throw ValidationError("molecule " + record_label(*this) +
                            ": self bond on atom " + std::to_string(bond.i));
    }
    if (!seen.emplace(std::min(bond.i, bond.j), std::max(bond.i, bond.j)).second) {
      throw ValidationError("molecule " + record_label(*this) + ": duplicate bond (" +
                            std::to_string(bond.i) + ", " + std::to_string(bond.j) +
                            ")");
    }
  }
  const bool coords = has_coords();
  for (int a = 0; a < n; ++a) {
    if (atoms[a].coords.has_value() != coords) {
      throw ValidationError("molecule " + record_label(*this) +
                            ": coordinates must be given for every atom or none");
    }
    if (coords) {
      for (double c : *atoms[a].coords) {
        if (!std::isfinite(c)) {
          throw ValidationError("molecule " + record_label(*this) +
                                ": non-finite coordinate on atom " + std::to_string(a));
        }
      }
    }
  }
}

Graph::Graph(int num_nodes, const std::vector<std::pair<int, int>>& edges)
    : num_nodes_(num_nodes), adjacency_(num_nodes), adjacency_edge_ids_(num_nodes) {
  if (num_nodes < 0) throw ValidationError("negative node count");
  std::set<std::pair<int, int>> seen;
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= num_nodes || b >= num_nodes) {
      throw ValidationError("dangling edge index (" + std::to_string(a) + ", " +
                            std::to_string(b) + ")");
    }
    if (a == b) throw ValidationError("self loop on node " + std::to_string(a));
    if (!seen.emplace(std::min(a, b), std::max(a, b)).second) {
      throw ValidationError("duplicate edge (" + std::to_string(a) + ", " +
                            std::to_string(b) + ")");
    }
    edges_.push_back({a, b});
  }
  std::vector<std::vector<std::pair<int, int>>> incident(num_nodes);
  for (int id = 0; id < num_edges(); ++id) {
    incident[edges_[id].u].emplace_back(edges_[id].v, id);
    incident[edges_[id].v].emplace_back(edges_[id].u, id);
  }
  for (int v = 0; v < num_nodes; ++v) {
    std::sort(incident[v].begin(), incident[v].end());
    for (const auto& [w, id] : incident[v]) {
      adjacency_[v].push_back(w);
      adjacency_edge_ids_[v].push_back(id);
    }
  }
}

int Graph::edge_id(int v, int w) const {
  if (v < 0 || v >= num_nodes_) return -1;
  const auto& nbrs = adjacency_[v];
  const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), w);
  if (it == nbrs.end() || *it != w) return -1;
  return adjacency_edge_ids_[v][it - nbrs.begin()];
}

std::span<const double> Graph::node_features(int v) const {
  return std::span<const double>(node_features_).subspan(
      static_cast<std::size_t>(v) * node_width_, node_width_);
}

std::span<const double> Graph::edge_features(int v, int w) const {
  const int id = edge_id(v, w);
  if (id < 0) {
    throw ValidationError("no edge between " + std::to_string(v) + " and " +
                          std::to_string(w));
  }
  return edge_features_by_id(id);
}

std::span<const double> Graph::edge_features_by_id(int id) const {
  return std::span<const double>(edge_features_).subspan(
      static_cast<std::size_t>(id) * edge_width_, edge_width_);
}

void Graph::set_node_features(int width, std::vector<double> values) {
  if (width < 0 || values.size() != static_cast<std::size_t>(width) * num_nodes_) {
    throw ShapeError("node feature table has " + std::to_string(values.size()) +
                     " entries, expected " + std::to_string(num_nodes_) + " x " +
                     std::to_string(width));
  }
  node_width_ = width;
  node_features_ = std::move(values);
}

void Graph::set_edge_features(int width, std::vector<double> values) {
  if (width < 0 || values.size() != static_cast<std::size_t>(width) * edges_.size()) {
    throw ShapeError("edge feature table has " + std::to_string(values.size()) +
                     " entries, expected " + std::to_string(edges_.size()) + " x " +
                     std::to_string(width));
  }
  edge_width_ = width;
  edge_features_ = std::move(values);
}

void Graph::set_coords(std::vector<Vec3> coords) {
  if (!coords.empty() && coords.size() != static_cast<std::size_t>(num_nodes_)) {
    throw ShapeError("coordinate table has " + std::to_string(coords.size()) +
                     " rows for " + std::to_string(num_nodes_) + " nodes");
  }
  coords_ = std::move(coords);
}

void Graph::set_elements(std::vector<std::string> elements) {
  if (!elements.empty() && elements.size() != static_cast<std::size_t>(num_nodes_)) {
    throw ShapeError("element table size does not match node count");
  }
  elements_ = std::move(elements);
}

void Graph::set_bond_orders(std::vector<BondOrder> orders) {
  if (!orders.empty() && orders.size() != edges_.size()) {
    throw ShapeError("bond order table size does not match edge count");
  }
  bond_orders_ = std::move(orders);
}

void Graph::set_labels(std::vector<int> labels) {
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(num_nodes_)) {
    throw ShapeError("label table size does not match node count");
  }
  labels_ = std::move(labels);
}

void Graph::check_invariants() const {
  if (adjacency_.size() != static_cast<std::size_t>(num_nodes_)) {
    throw ValidationError("adjacency size mismatch");
  }
  for (int v = 0; v < num_nodes_; ++v) {
    const auto& nbrs = adjacency_[v];
    if (!std::is_sorted(nbrs.begin(), nbrs.end())) {
      throw ValidationError("unsorted neighbour list at node " + std::to_string(v));
    }
    for (int w : nbrs) {
      const auto& back = adjacency_[w];
      if (!std::binary_search(back.begin(), back.end(), v)) {
        throw ValidationError("asymmetric adjacency between " + std::to_string(v) +
                              " and " + std::to_string(w));
      }
      if (edge_id(v, w) != edge_id(w, v)) {
        throw ValidationError("edge ids differ by direction");
      }
    }
  }
  if (node_features_.size() != static_cast<std::size_t>(node_width_) * num_nodes_ ||
      edge_features_.size() != static_cast<std::size_t>(edge_width_) * edges_.size()) {
    throw ValidationError("feature table size mismatch");
  }
}

int atom_feature_width(const FeaturizerConfig& config) {
  return static_cast<int>(config.vocabulary.size()) + 1 +
         (config.ring_flags ? kRingFlagWidth : 0);
}

Graph build_graph(const MoleculeRecord& record, const FeaturizerConfig& config) {
  record.validate();

  // Vocabulary lookup happens before hydrogen stripping so an unknown symbol is
  // reported even if it would be dropped.
  std::vector<int> element_index(record.atoms.size());
  for (std::size_t a = 0; a < record.atoms.size(); ++a) {
    const std::string& symbol = record.atoms[a].element;
    const auto it = std::find(config.vocabulary.begin(), config.vocabulary.end(), symbol);
    const bool is_hydrogen = symbol == "H";
    if (it == config.vocabulary.end() && !(is_hydrogen && !config.explicit_hydrogens)) {
      throw ValidationError("molecule " + record_label(record) +
                            ": unknown element symbol '" + symbol + "'");
    }
    element_index[a] = it == config.vocabulary.end()
                           ? -1
                           : static_cast<int>(it - config.vocabulary.begin());
  }

  std::vector<int> remap(record.atoms.size(), -1);
  std::vector<int> kept;
  for (std::size_t a = 0; a < record.atoms.size(); ++a) {
    if (!config.explicit_hydrogens && record.atoms[a].element == "H") continue;
    remap[a] = static_cast<int>(kept.size());
    kept.push_back(static_cast<int>(a));
  }
  const int n = static_cast<int>(kept.size());

  std::vector<std::pair<int, int>> edges;
  std::vector<BondOrder> orders;
  for (const Bond& bond : record.bonds) {
    if (remap[bond.i] < 0 || remap[bond.j] < 0) continue;
    edges.emplace_back(remap[bond.i], remap[bond.j]);
    orders.push_back(bond.order);
  }
  Graph graph(n, edges);

  std::vector<std::string> elements;
  elements.reserve(n);
  for (int a : kept) elements.push_back(record.atoms[a].element);
  graph.set_elements(std::move(elements));
  graph.set_bond_orders(orders);

  const bool coords = record.has_coords();
  if (coords) {
    std::vector<Vec3> xyz;
    xyz.reserve(n);
    for (int a : kept) xyz.push_back(*record.atoms[a].coords);
    graph.set_coords(std::move(xyz));
  }

  const int edge_width = kNumBondOrders + (coords ? 1 : 0);
  std::vector<double> edge_features(static_cast<std::size_t>(graph.num_edges()) * edge_width,
                                    0.0);
  for (int id = 0; id < graph.num_edges(); ++id) {
    double* row = edge_features.data() + static_cast<std::size_t>(id) * edge_width;
    row[static_cast<int>(orders[id])] = 1.0;
    if (coords) {
      const auto& e = graph.edge(id);
      row[kNumBondOrders] = distance(graph.coords(e.u), graph.coords(e.v));
    }
  }
  graph.set_edge_features(edge_width, std::move(edge_features));

  const int vocab = static_cast<int>(config.vocabulary.size());
  const int width = atom_feature_width(config);
  std::vector<double> node_features(static_cast<std::size_t>(n) * width, 0.0);
  std::vector<RingFlags> rings;
  if (config.ring_flags) rings = ring_membership(graph);
  for (int v = 0; v < n; ++v) {
    double* row = node_features.data() + static_cast<std::size_t>(v) * width;
    row[element_index[kept[v]]] = 1.0;
    row[vocab] = static_cast<double>(graph.degree(v));
    if (config.ring_flags) {
      for (int k = 0; k < kRingFlagWidth; ++k) row[vocab + 1 + k] = rings[v][k];
    }
  }
  graph.set_node_features(width, std::move(node_features));
  return graph;
}

std::string serialize_graph(const Graph& graph) {
  json out;
  out["n"] = graph.num_nodes();
  json edges = json::array();
  for (int id = 0; id < graph.num_edges(); ++id) {
    edges.push_back({graph.edge(id).u, graph.edge(id).v});
  }
  out["edges"] = std::move(edges);
  out["node_width"] = graph.node_feature_width();
  out["node_features"] = graph.node_feature_matrix();
  out["edge_width"] = graph.edge_feature_width();
  std::vector<double> edge_features;
  for (int id = 0; id < graph.num_edges(); ++id) {
    const auto row = graph.edge_features_by_id(id);
    edge_features.insert(edge_features.end(), row.begin(), row.end());
  }
  out["edge_features"] = std::move(edge_features);
  if (graph.has_coords()) out["coords"] = graph.all_coords();
  if (!graph.elements().empty()) out["elements"] = graph.elements();
  if (!graph.bond_orders().empty()) {
    json orders = json::array();
    for (BondOrder order : graph.bond_orders()) orders.push_back(to_string(order));
    out["bond_orders"] = std::move(orders);
  }
  if (!graph.labels().empty()) out["labels"] = graph.labels();
  return out.dump();
}

Graph parse_graph(std::string_view text) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("graph text is not valid JSON: ") + e.what());
  }
  try {
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : in.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    Graph graph(in.at("n").get<int>(), edges);
    graph.set_node_features(in.at("node_width").get<int>(),
                            in.at("node_features").get<std::vector<double>>());
    graph.set_edge_features(in.at("edge_width").get<int>(),
                            in.at("edge_features").get<std::vector<double>>());
    if (in.contains("coords")) graph.set_coords(in["coords"].get<std::vector<Vec3>>());
    if (in.contains("elements")) {
      graph.set_elements(in["elements"].get<std::vector<std::string>>());
    }
    if (in.contains("bond_orders")) {
      std::vector<BondOrder> orders;
      for (const auto& o : in["bond_orders"]) orders.push_back(parse_bond_order(o.get<std::string>()));
      graph.set_bond_orders(std::move(orders));
    }
    if (in.contains("labels")) graph.set_labels(in["labels"].get<std::vector<int>>());
    return graph;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed graph text: ") + e.what());
  }
}

}  // namespace pmpnn
