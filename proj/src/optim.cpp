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

#include "pathmpnn/optim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "pathmpnn/error.hpp"

namespace pmpnn {

namespace {

constexpr char kMagic[8] = {'P', 'M', 'P', 'N', 'N', 'C', 'K', 'P'};

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::filesystem::path& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw ValidationError("checkpoint " + path.string() + " is truncated");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::string read_string(std::istream& in, std::uint32_t length,
                        const std::filesystem::path& path) {
  std::string s(length, '\0');
  if (length > 0 && !in.read(s.data(), length)) {
    throw ValidationError("checkpoint " + path.string() + " is truncated");
  }
  return s;
}

}  // namespace

Tensor ParameterSet::add_weight(const std::string& name, int fan_in, int fan_out,
                                std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  std::vector<double> values(static_cast<std::size_t>(fan_in) * fan_out);
  for (double& x : values) x = dist(rng);
  return add(name, Tensor::parameter({fan_in, fan_out}, std::move(values)));
}

Tensor ParameterSet::add_zeros(const std::string& name, Shape shape) {
  return add(name, Tensor::parameter(shape, std::vector<double>(shape.size(), 0.0)));
}

Tensor ParameterSet::add(const std::string& name, Tensor parameter) {
  if (contains(name)) throw ValidationError("duplicate parameter name '" + name + "'");
  entries_.emplace_back(name, parameter);
  return parameter;
}

const Tensor& ParameterSet::get(const std::string& name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw ValidationError("unknown parameter '" + name + "'");
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return e.first == name; });
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t total = 0;
  for (const auto& [n, t] : entries_) total += t.size();
  return total;
}

void ParameterSet::zero_grad() {
  for (auto& [n, t] : entries_) t.zero_grad();
}

void ParameterSet::assign(const ParameterSet& other) {
  if (other.entries_.size() != entries_.size()) {
    throw ValidationError("parameter sets differ in size");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& [name, t] = entries_[i];
    const auto& [oname, ot] = other.entries_[i];
    if (name != oname || !(t.shape() == ot.shape())) {
      throw ValidationError("parameter mismatch at '" + name + "'");
    }
    std::copy(ot.values().begin(), ot.values().end(), t.mutable_values().begin());
  }
}

ParameterSet ParameterSet::clone() const {
  ParameterSet out;
  for (const auto& [name, t] : entries_) {
    out.add(name, Tensor::parameter(t.shape(), {t.values().begin(), t.values().end()}));
  }
  return out;
}

void adam_step(std::span<double> param, std::span<const double> grad, AdamState& state,
               const AdamOptions& options) {
  if (param.size() != grad.size()) {
    throw ShapeError("adam_step: " + std::to_string(grad.size()) + " gradients for " +
                     std::to_string(param.size()) + " parameters");
  }
  if (state.m.empty()) {
    state.m.assign(param.size(), 0.0);
    state.v.assign(param.size(), 0.0);
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    state.m[i] = options.beta1 * state.m[i] + (1.0 - options.beta1) * g;
    state.v[i] = options.beta2 * state.v[i] + (1.0 - options.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    param[i] -= options.lr * m_hat / (std::sqrt(v_hat) + options.eps);
  }
}

Adam::Adam(ParameterSet& params, AdamOptions options)
    : params_(&params), options_(options), states_(params.size()) {}

void Adam::step() {
  auto& entries = params_->entries();
  std::vector<double> grad;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Tensor t = entries[i].second;
    grad = t.grad();
    const bool decay = options_.weight_decay != 0.0 &&
                       entries[i].first.rfind(decay_prefix_, 0) == 0;
    if (decay) {
      const auto v = t.values();
      for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += options_.weight_decay * v[j];
    }
    adam_step(t.mutable_values(), grad, states_[i], options_);
  }
}

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params,
                     const std::string& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(meta.size()));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params.entries()) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_le<std::uint32_t>(out, 2);
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(t.rows()));
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(t.cols()));
    for (double x : t.values()) write_le<double>(out, x);
  }
  if (!out) throw ValidationError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError(path.string() + " is not a checkpoint file");
  }
  const auto version = read_le<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw ValidationError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.meta = read_string(in, read_le<std::uint32_t>(in, path), path);
  const auto count = read_le<std::uint32_t>(in, path);
  for (std::uint32_t p = 0; p < count; ++p) {
    std::string name = read_string(in, read_le<std::uint32_t>(in, path), path);
    const auto rank = read_le<std::uint32_t>(in, path);
    if (rank != 2) throw ValidationError("parameter '" + name + "' has unsupported rank");
    const auto rows = read_le<std::uint64_t>(in, path);
    const auto cols = read_le<std::uint64_t>(in, path);
    std::vector<double> values(rows * cols);
    for (double& x : values) x = read_le<double>(in, path);
    ckpt.params.emplace_back(std::move(name),
                             Tensor::parameter({static_cast<int>(rows), static_cast<int>(cols)},
                                               std::move(values)));
  }
  return ckpt;
}

void restore_parameters(ParameterSet& params, const Checkpoint& checkpoint) {
  ParameterSet loaded;
  for (const auto& [name, t] : checkpoint.params) loaded.add(name, t);
  params.assign(loaded);
}

}  // namespace pmpnn
