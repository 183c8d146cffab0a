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

#ifndef PATHMPNN_GEOMETRY_HPP_
#define PATHMPNN_GEOMETRY_HPP_

#include <optional>
#include <span>
#include <vector>

#include "pathmpnn/graph.hpp"
#include "pathmpnn/paths.hpp"

namespace pmpnn {

// Norm guard for bond vectors and plane normals, in Angstrom.
inline constexpr double kGeometryEpsilon = 1e-8;

// Angle at vertex w between bonds w->v and w->y, in [0, pi].
// Throws DegenerateGeometryError when either bond vector is shorter than
// kGeometryEpsilon.
double bond_angle(std::span<const Vec3> coords, int v, int w, int y);

// Signed torsion of v-w-y-x about the w->y axis, in (-pi, pi]. Planar cis is 0,
// planar trans is pi. Throws DegenerateGeometryError when either plane normal
// vanishes (collinear triple).
double dihedral(std::span<const Vec3> coords, int v, int w, int y, int x);

// Internal-coordinate features of one path. Length 1 fills bond_lengths only;
// length 2 adds one angle cosine; length 3 adds the second angle cosine and the
// dihedral. A collinear triple in a length-3 path falls back to cos = 1,
// sin = 0 with degenerate = true.
struct GeometryFeatures {
  std::vector<double> bond_lengths;
  std::vector<double> angle_cosines;
  std::optional<double> dihedral_cos;
  std::optional<double> dihedral_sin;
  bool degenerate = false;

  // bond lengths, angle cosines, then (cos, sin, degenerate) when present.
  std::vector<double> flatten() const;
  static int width(int path_length);
};

// Supports path lengths 1..3. Throws ValidationError when the graph has no
// coordinates or the path is longer than 3.
GeometryFeatures geometry_path_features(const Graph& graph, const Path& path);

}  // namespace pmpnn

#endif  // PATHMPNN_GEOMETRY_HPP_
