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

#ifndef PATHMPNN_OPTIM_HPP_
#define PATHMPNN_OPTIM_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pathmpnn/tensor.hpp"

namespace pmpnn {

// Ordered, named collection of trainable leaves.
class ParameterSet {
 public:
  // Glorot-uniform weights, a = sqrt(6 / (fan_in + fan_out)).
  Tensor add_weight(const std::string& name, int fan_in, int fan_out, std::mt19937_64& rng);
  Tensor add_zeros(const std::string& name, Shape shape);
  Tensor add(const std::string& name, Tensor parameter);

  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::size_t scalar_count() const;

  void zero_grad();
  // Copies every value from `other`; names and shapes must match.
  void assign(const ParameterSet& other);
  ParameterSet clone() const;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // L2 coefficient added to the gradient of the selected parameters.
  double weight_decay = 0.0;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

// One bias-corrected Adam update of `param` in place. State vectors are
// zero-initialised on first use.
void adam_step(std::span<double> param, std::span<const double> grad, AdamState& state,
               const AdamOptions& options);

class Adam {
 public:
  Adam(ParameterSet& params, AdamOptions options);

  // Weight decay applies to parameters whose name starts with this prefix;
  // empty means all parameters.
  void set_decay_prefix(std::string prefix) { decay_prefix_ = std::move(prefix); }
  void step();
  const AdamOptions& options() const { return options_; }

 private:
  ParameterSet* params_;
  AdamOptions options_;
  std::string decay_prefix_;
  std::vector<AdamState> states_;
};

// Binary checkpoint, all integers and doubles little-endian:
//   magic "PMPNNCKP", u32 version, u32 meta length, meta bytes (JSON text),
//   u32 count, then per parameter: u32 name length, name bytes, u32 rank (2),
//   u64 rows, u64 cols, rows*cols f64 values.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string meta;
  std::vector<std::pair<std::string, Tensor>> params;
};

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params,
                     const std::string& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);
// Overwrites `params` with checkpoint values; every name must match.
void restore_parameters(ParameterSet& params, const Checkpoint& checkpoint);

}  // namespace pmpnn

#endif  // PATHMPNN_OPTIM_HPP_
