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

#ifndef PATHMPNN_SYNTH_HPP_
#define PATHMPNN_SYNTH_HPP_

#include <cstdint>
#include <string_view>

#include "pathmpnn/geometry.hpp"
#include "pathmpnn/io.hpp"

namespace pmpnn {

enum class SynthTask { kAlcoholCount, kDihedralSum };

SynthTask parse_synth_task(std::string_view text);
std::string_view to_string(SynthTask task);

// Random C/N/O heavy-atom molecules (trees, sometimes with one 5- or
// 6-membered ring) without coordinates. Target: number of hydroxyl oxygens
// found by detect_alcohol in heavy-atom mode. Terminal oxygens are single
// (hydroxyl) or double (carbonyl) bonded at random.
MoleculeDataset generate_alcohol_count(int count, std::uint64_t seed);

// Acyclic carbon skeletons with 3D coordinates placed from random internal
// coordinates. Target: sum of cos(dihedral) over the undirected length-3
// paths of each molecule.
MoleculeDataset generate_dihedral_sum(int count, std::uint64_t seed);

MoleculeDataset generate_synthetic(SynthTask task, int count, std::uint64_t seed);

// Place atom d so that |cd| = bond, angle(b, c, d) = angle and
// dihedral(a, b, c, d) = torsion (radians).
Vec3 place_atom(const Vec3& a, const Vec3& b, const Vec3& c, double bond, double angle,
                double torsion);

}  // namespace pmpnn

#endif  // PATHMPNN_SYNTH_HPP_
