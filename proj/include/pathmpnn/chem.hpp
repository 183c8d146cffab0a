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

#ifndef PATHMPNN_CHEM_HPP_
#define PATHMPNN_CHEM_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pathmpnn/graph.hpp"
#include "pathmpnn/paths.hpp"

namespace pmpnn {

inline constexpr int kMinRingSize = 3;
inline constexpr int kMaxRingSize = 8;
// One flag per ring size 3..8, then the any-ring flag.
inline constexpr int kRingFlagWidth = kMaxRingSize - kMinRingSize + 2;
inline constexpr int kAnyRingFlag = kRingFlagWidth - 1;
inline constexpr int kGroupFlagWidth = 2;

using RingFlags = std::array<std::uint8_t, kRingFlagWidth>;

// flags[v][s - 3] is 1 iff v lies on a simple cycle of exactly s nodes.
std::vector<RingFlags> ring_membership(const Graph& graph);

// One matched functional group: its atoms and the bonds that characterise it
// (for alcohol, the O-C bond and the O-H bond when hydrogens are explicit).
struct GroupMatch {
  std::string name;
  std::vector<int> atoms;
  std::vector<int> bond_ids;
};

enum class HydrogenMode { kHeavyAtom, kExplicit };

// Hydroxyl detection. Explicit mode: O with exactly one H and exactly one C
// neighbour. Heavy-atom mode: O of degree 1 single-bonded to C.
std::vector<GroupMatch> detect_alcohol(const Graph& graph, HydrogenMode mode);

using GroupDetector =
    std::function<std::vector<GroupMatch>(const Graph&, HydrogenMode)>;

// Named group detectors. Only alcohol ships by default; more detectors can be
// registered without touching the feature assembly.
class GroupRegistry {
 public:
  static GroupRegistry with_defaults();

  void add(std::string name, GroupDetector detector);
  std::vector<GroupMatch> detect(const Graph& graph, HydrogenMode mode) const;
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::vector<GroupDetector> detectors_;
};

struct SubstructureFeatures {
  // Ring flags of the non-root path nodes v1..vk, in path order.
  std::vector<RingFlags> ring_flags;
  // Path traverses a bond of a matched alcohol group.
  std::uint8_t alcohol = 0;
  // Terminal path node belongs to a matched group.
  std::uint8_t in_group = 0;

  // ring_flags row-major, then alcohol, then in_group.
  std::vector<double> flatten() const;
  static int width(int path_length) {
    return path_length * kRingFlagWidth + kGroupFlagWidth;
  }
};

// Per-graph precomputation shared by every path of that graph.
class SubstructureIndex {
 public:
  SubstructureIndex(const Graph& graph, HydrogenMode mode,
                    const GroupRegistry& registry = GroupRegistry::with_defaults());

  const std::vector<RingFlags>& rings() const { return rings_; }
  const std::vector<GroupMatch>& groups() const { return groups_; }
  bool is_alcohol_bond(int edge_id) const;
  bool in_group(int node) const { return in_group_[node] != 0; }

 private:
  const Graph* graph_;
  std::vector<RingFlags> rings_;
  std::vector<GroupMatch> groups_;
  std::vector<std::uint8_t> alcohol_bond_;
  std::vector<std::uint8_t> in_group_;

  friend SubstructureFeatures substructure_path_features(const SubstructureIndex&,
                                                         const Path&);
};

SubstructureFeatures substructure_path_features(const SubstructureIndex& index,
                                                const Path& path);

}  // namespace pmpnn

#endif  // PATHMPNN_CHEM_HPP_
