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

#include "pathmpnn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pathmpnn/error.hpp"

namespace pmpnn {

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

std::string atoms_label(std::initializer_list<int> atoms) {
  std::string out = "(";
  for (int a : atoms) {
    if (out.size() > 1) out += ", ";
    out += std::to_string(a);
  }
  return out + ")";
}

void check_index(std::span<const Vec3> coords, std::initializer_list<int> atoms) {
  for (int a : atoms) {
    if (a < 0 || static_cast<std::size_t>(a) >= coords.size()) {
      throw ValidationError("atom index " + std::to_string(a) + " has no coordinates");
    }
  }
}

}  // namespace

double bond_angle(std::span<const Vec3> coords, int v, int w, int y) {
  check_index(coords, {v, w, y});
  const Vec3 a = sub(coords[v], coords[w]);
  const Vec3 b = sub(coords[y], coords[w]);
  const double na = norm(a);
  const double nb = norm(b);
  if (na <= kGeometryEpsilon || nb <= kGeometryEpsilon) {
    throw DegenerateGeometryError("zero-length bond vector in angle " +
                                  atoms_label({v, w, y}));
  }
  const double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
  return std::acos(c);
}

double dihedral(std::span<const Vec3> coords, int v, int w, int y, int x) {
  check_index(coords, {v, w, y, x});
  const Vec3 b1 = sub(coords[w], coords[v]);
  const Vec3 b2 = sub(coords[y], coords[w]);
  const Vec3 b3 = sub(coords[x], coords[y]);
  const Vec3 n1 = cross(b1, b2);
  const Vec3 n2 = cross(b2, b3);
  const double nb2 = norm(b2);
  if (norm(n1) <= kGeometryEpsilon || norm(n2) <= kGeometryEpsilon ||
      nb2 <= kGeometryEpsilon) {
    throw DegenerateGeometryError("undefined torsion plane for atoms " +
                                  atoms_label({v, w, y, x}));
  }
  const Vec3 axis = {b2[0] / nb2, b2[1] / nb2, b2[2] / nb2};
  const double s = dot(axis, cross(n1, n2));
  const double c = dot(n1, n2);
  const double phi = std::atan2(s, c);
  return phi <= -std::numbers::pi ? std::numbers::pi : phi;
}

int GeometryFeatures::width(int path_length) {
  switch (path_length) {
    case 1:
      return 1;
    case 2:
      return 3;
    case 3:
      return 8;
    default:
      throw ValidationError("geometry features defined for path lengths 1..3, got " +
                            std::to_string(path_length));
  }
}

std::vector<double> GeometryFeatures::flatten() const {
  std::vector<double> out(bond_lengths);
  out.insert(out.end(), angle_cosines.begin(), angle_cosines.end());
  if (dihedral_cos) {
    out.push_back(*dihedral_cos);
    out.push_back(*dihedral_sin);
    out.push_back(degenerate ? 1.0 : 0.0);
  }
  return out;
}

GeometryFeatures geometry_path_features(const Graph& graph, const Path& path) {
  if (!graph.has_coords()) {
    throw ValidationError("geometry features require atomic coordinates");
  }
  const int k = path.length();
  if (k < 1 || k > 3) {
    throw ValidationError("geometry features defined for path lengths 1..3, got " +
                          std::to_string(k));
  }
  const std::span<const Vec3> xyz(graph.all_coords());
  const auto& p = path.nodes;
  GeometryFeatures out;
  for (int i = 0; i < k; ++i) out.bond_lengths.push_back(norm(sub(xyz[p[i + 1]], xyz[p[i]])));
  for (int i = 0; i + 2 <= k; ++i) {
    out.angle_cosines.push_back(std::cos(bond_angle(xyz, p[i], p[i + 1], p[i + 2])));
  }
  if (k == 3) {
    try {
      const double phi = dihedral(xyz, p[0], p[1], p[2], p[3]);
      out.dihedral_cos = std::cos(phi);
      out.dihedral_sin = std::sin(phi);
    } catch (const DegenerateGeometryError&) {
      out.dihedral_cos = 1.0;
      out.dihedral_sin = 0.0;
      out.degenerate = true;
    }
  }
  return out;
}

}  // namespace pmpnn
