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

#include "pathmpnn/chem.hpp"

#include <algorithm>

#include "pathmpnn/error.hpp"

namespace pmpnn {

namespace {

// Depth-first cycle search. Every cycle is discovered from its smallest node,
// so only nodes larger than `start` may appear on the open path.
class CycleSearch {
 public:
  CycleSearch(const Graph& graph, std::vector<RingFlags>& flags)
      : graph_(graph), flags_(flags), on_path_(graph.num_nodes(), 0) {}

  void from(int start) {
    start_ = start;
    path_.assign(1, start);
    on_path_[start] = 1;
    extend();
    on_path_[start] = 0;
  }

 private:
  void extend() {
    const int last = path_.back();
    const int size = static_cast<int>(path_.size());
    for (int w : graph_.neighbors(last)) {
      if (w == start_) {
        if (size >= kMinRingSize) mark(size);
        continue;
      }
      if (w < start_ || on_path_[w] || size >= kMaxRingSize) continue;
      path_.push_back(w);
      on_path_[w] = 1;
      extend();
      on_path_[w] = 0;
      path_.pop_back();
    }
  }

  void mark(int size) {
    for (int v : path_) {
      flags_[v][size - kMinRingSize] = 1;
      flags_[v][kAnyRingFlag] = 1;
    }
  }

  const Graph& graph_;
  std::vector<RingFlags>& flags_;
  std::vector<std::uint8_t> on_path_;
  std::vector<int> path_;
  int start_ = 0;
};

}  // namespace

std::vector<RingFlags> ring_membership(const Graph& graph) {
  std::vector<RingFlags> flags(graph.num_nodes(), RingFlags{});
  CycleSearch search(graph, flags);
  for (int v = 0; v < graph.num_nodes(); ++v) search.from(v);
  return flags;
}

std::vector<GroupMatch> detect_alcohol(const Graph& graph, HydrogenMode mode) {
  const auto& elements = graph.elements();
  if (elements.empty()) {
    throw ValidationError("alcohol detection needs element symbols on the graph");
  }
  const auto& orders = graph.bond_orders();
  std::vector<GroupMatch> out;
  for (int o = 0; o < graph.num_nodes(); ++o) {
    if (elements[o] != "O") continue;
    int carbon = -1;
    int hydrogen = -1;
    int carbons = 0;
    int hydrogens = 0;
    for (int w : graph.neighbors(o)) {
      if (elements[w] == "C") {
        carbon = w;
        ++carbons;
      } else if (elements[w] == "H") {
        hydrogen = w;
        ++hydrogens;
      }
    }
    GroupMatch match{"alcohol", {}, {}};
    if (mode == HydrogenMode::kExplicit) {
      if (graph.degree(o) != 2 || carbons != 1 || hydrogens != 1) continue;
      match.atoms = {o, hydrogen};
      match.bond_ids = {graph.edge_id(o, carbon), graph.edge_id(o, hydrogen)};
    } else {
      if (graph.degree(o) != 1 || carbons != 1) continue;
      const int bond = graph.edge_id(o, carbon);
      // A terminal O double-bonded to C is a carbonyl, not a hydroxyl.
      if (!orders.empty() && orders[bond] != BondOrder::kSingle) continue;
      match.atoms = {o};
      match.bond_ids = {bond};
    }
    std::sort(match.atoms.begin(), match.atoms.end());
    out.push_back(std::move(match));
  }
  return out;
}

GroupRegistry GroupRegistry::with_defaults() {
  GroupRegistry registry;
  registry.add("alcohol", detect_alcohol);
  return registry;
}

void GroupRegistry::add(std::string name, GroupDetector detector) {
  names_.push_back(std::move(name));
  detectors_.push_back(std::move(detector));
}

std::vector<GroupMatch> GroupRegistry::detect(const Graph& graph, HydrogenMode mode) const {
  std::vector<GroupMatch> out;
  for (const auto& detector : detectors_) {
    auto found = detector(graph, mode);
    out.insert(out.end(), std::make_move_iterator(found.begin()),
               std::make_move_iterator(found.end()));
  }
  return out;
}

std::vector<double> SubstructureFeatures::flatten() const {
  std::vector<double> out;
  out.reserve(ring_flags.size() * kRingFlagWidth + kGroupFlagWidth);
  for (const RingFlags& flags : ring_flags) out.insert(out.end(), flags.begin(), flags.end());
  out.push_back(alcohol);
  out.push_back(in_group);
  return out;
}

SubstructureIndex::SubstructureIndex(const Graph& graph, HydrogenMode mode,
                                     const GroupRegistry& registry)
    : graph_(&graph),
      rings_(ring_membership(graph)),
      groups_(registry.detect(graph, mode)),
      alcohol_bond_(graph.num_edges(), 0),
      in_group_(graph.num_nodes(), 0) {
  for (const GroupMatch& match : groups_) {
    for (int a : match.atoms) in_group_[a] = 1;
    if (match.name == "alcohol") {
      for (int id : match.bond_ids) alcohol_bond_[id] = 1;
    }
  }
}

bool SubstructureIndex::is_alcohol_bond(int edge_id) const {
  return edge_id >= 0 && alcohol_bond_[edge_id] != 0;
}

SubstructureFeatures substructure_path_features(const SubstructureIndex& index,
                                                const Path& path) {
  SubstructureFeatures out;
  const auto& nodes = path.nodes;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    out.ring_flags.push_back(index.rings_[nodes[i]]);
    if (index.is_alcohol_bond(index.graph_->edge_id(nodes[i - 1], nodes[i]))) {
      out.alcohol = 1;
    }
  }
  out.in_group = index.in_group(nodes.back()) ? 1 : 0;
  return out;
}

}  // namespace pmpnn
