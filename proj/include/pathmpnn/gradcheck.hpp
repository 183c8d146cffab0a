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

#ifndef PATHMPNN_GRADCHECK_HPP_
#define PATHMPNN_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pathmpnn/graph.hpp"
#include "pathmpnn/model.hpp"
#include "pathmpnn/tensor.hpp"

namespace pmpnn {

inline constexpr double kGradcheckStep = 1e-5;
inline constexpr double kGradcheckTolerance = 1e-4;

// |a - n| / max(|a|, |n|, 1e-6). The floor keeps entries whose true gradient
// is zero from dividing by round-off.
double relative_error(double analytic, double numeric);

struct GradcheckResult {
  std::string name;
  double max_relative_error = 0.0;
  int entries = 0;
  bool passed = false;
};

// Compares backward() against central differences for every entry of every
// tensor in `inputs`. `loss` must rebuild the scalar from the current values.
GradcheckResult check_gradients(const std::string& name, const std::function<Tensor()>& loss,
                                const std::vector<Tensor>& inputs,
                                double step = kGradcheckStep);

std::vector<std::string> gradcheck_op_names();
// Throws ValidationError for unknown names.
GradcheckResult gradcheck_op(const std::string& name, std::uint64_t seed = 7);
std::vector<GradcheckResult> gradcheck_all_ops(std::uint64_t seed = 7);

// Five heavy atoms with non-degenerate 3D coordinates (branched, so every
// path length up to 3 occurs).
MoleculeRecord gradcheck_molecule();

// Full forward + backward of PathMpnn (max path length 3) on
// gradcheck_molecule() for one feature mode, over every parameter.
GradcheckResult gradcheck_model(FeatureMode mode, std::uint64_t seed = 11);
std::vector<GradcheckResult> gradcheck_full_model(std::uint64_t seed = 11);

}  // namespace pmpnn

#endif  // PATHMPNN_GRADCHECK_HPP_
