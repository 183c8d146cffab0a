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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "doctest.h"
#include "pathmpnn/error.hpp"
#include "pathmpnn/gradcheck.hpp"
#include "pathmpnn/optim.hpp"
#include "pathmpnn/tensor.hpp"

using namespace pmpnn;

namespace {

Tensor random_param(Shape shape, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::vector<double> v(shape.size());
  for (double& x : v) x = gauss(rng);
  return Tensor::parameter(shape, v);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pathmpnn_test_" + name);
}

}  // namespace

TEST_CASE("identity matmul is exact") {
  std::mt19937_64 rng(1);
  const Tensor x = random_param({3, 4}, rng);
  const Tensor eye = Tensor::constant({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  const Tensor y = matmul(eye, x);
  CHECK(std::equal(y.values().begin(), y.values().end(), x.values().begin()));
}

TEST_CASE("uniform softmax") {
  const Tensor s = softmax(Tensor::zeros({1, 3}), 1);
  for (double v : s.values()) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("segment sum example") {
  const std::vector<int> ids = {0, 0, 1, 1};
  const Tensor out = segment_sum(Tensor::constant({4, 1}, {1, 2, 3, 4}), ids, 2);
  CHECK(out.values()[0] == 3.0);
  CHECK(out.values()[1] == 7.0);
}

TEST_CASE("segment sum is permutation covariant") {
  std::mt19937_64 rng(2);
  const Tensor v = random_param({8, 3}, rng);
  std::vector<int> ids = {0, 2, 1, 1, 0, 2, 2, 0};
  std::vector<int> perm(8);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> permuted_ids;
  for (int p : perm) permuted_ids.push_back(ids[p]);
  const Tensor a = segment_sum(v, ids, 3);
  const Tensor b = segment_sum(gather_rows(v, perm), permuted_ids, 3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.values()[i] == doctest::Approx(b.values()[i]).epsilon(1e-14));
}

TEST_CASE("shape errors name the op") {
  const Tensor a = Tensor::zeros({2, 3});
  const Tensor b = Tensor::zeros({2, 3});
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("matmul"), ShapeError);
  CHECK_THROWS_WITH_AS(add(a, Tensor::zeros({3, 2})), doctest::Contains("[3, 2]"), ShapeError);
}

TEST_CASE("backward needs a scalar") {
  const Tensor a = Tensor::parameter({2, 2}, {1, 2, 3, 4});
  CHECK_THROWS_AS(backward(a), ShapeError);
}

TEST_CASE("linear gradient") {
  const Tensor w = Tensor::parameter({1, 3}, {0.5, -1.0, 2.0});
  const Tensor x = Tensor::constant({3, 1}, {1.0, 2.0, 3.0});
  backward(sum(matmul(w, x)));
  CHECK(w.grad() == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("reused tensor accumulates") {
  const Tensor a = Tensor::parameter({1, 1}, {3.0});
  // f = a*a + 2a, df/da = 2a + 2
  backward(sum(add(mul(a, a), scale(a, 2.0))));
  CHECK(a.grad()[0] == doctest::Approx(8.0).epsilon(1e-15));
}

TEST_CASE("every op passes the finite-difference check") {
  for (const std::string& name : gradcheck_op_names()) {
    const GradcheckResult r = gradcheck_op(name);
    INFO(name << " max relative error " << r.max_relative_error);
    CHECK(r.passed);
    CHECK(r.max_relative_error < kGradcheckTolerance);
    CHECK(r.entries > 0);
  }
  CHECK_THROWS_AS(gradcheck_op("no-such-op"), ValidationError);
}

TEST_CASE("gradient checks on other seeds") {
  for (std::uint64_t seed : {1, 2, 3}) {
    for (const std::string& name : gradcheck_op_names()) {
      INFO(name << " seed " << seed);
      CHECK(gradcheck_op(name, seed).passed);
    }
  }
}

TEST_CASE("non-finite output is flagged") {
  const bool before = finite_checks_enabled();
  set_finite_checks(true);
  CHECK_THROWS_AS(sqrt(Tensor::constant({1, 1}, {-1.0})), NumericError);
  set_finite_checks(before);
}

TEST_CASE("adam basics") {
  std::vector<double> p = {1.0, -2.0};
  AdamState state;
  adam_step(p, std::vector<double>{0.0, 0.0}, state, {});
  CHECK(p == std::vector<double>{1.0, -2.0});

  std::vector<double> q = {1.0, -2.0};
  AdamState fresh;
  AdamOptions opt;
  opt.lr = 0.01;
  adam_step(q, std::vector<double>{3.0, -0.5}, fresh, opt);
  CHECK(q[0] - 1.0 == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(q[1] + 2.0 == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("adam minimises a quadratic bowl") {
  ParameterSet params;
  const Tensor x = params.add("x", Tensor::parameter({1, 3}, {3.0, -2.0, 1.5}));
  const Tensor centre = Tensor::constant({1, 3}, {0.5, 1.0, -1.0});
  AdamOptions opt;
  opt.lr = 0.05;
  Adam adam(params, opt);
  double loss = 0;
  for (int step = 0; step < 500; ++step) {
    params.zero_grad();
    const Tensor l = sum(square(sub(x, centre)));
    loss = l.item();
    backward(l);
    adam.step();
  }
  CHECK(sum(square(sub(x, centre))).item() < 1e-6);
  CHECK(loss < 1e-5);
}

TEST_CASE("same seed gives identical parameters after training steps") {
  auto run = [] {
    std::mt19937_64 rng(42);
    ParameterSet params;
    const Tensor w = params.add_weight("w", 4, 3, rng);
    Adam adam(params, {});
    std::mt19937_64 data(7);
    for (int step = 0; step < 20; ++step) {
      const Tensor x = random_param({5, 4}, data);
      params.zero_grad();
      backward(mean(square(tanh(matmul(x, w)))));
      adam.step();
    }
    return std::vector<double>(w.values().begin(), w.values().end());
  };
  CHECK(run() == run());
}

TEST_CASE("glorot initialisation bounds") {
  std::mt19937_64 rng(3);
  ParameterSet params;
  const Tensor w = params.add_weight("w", 10, 6, rng);
  const double a = std::sqrt(6.0 / 16.0);
  for (double v : w.values()) CHECK(std::abs(v) <= a);
  const Tensor b = params.add_zeros("b", {1, 6});
  for (double v : b.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(params.add_zeros("b", {1, 1}), ValidationError);
}

TEST_CASE("checkpoint round trip") {
  std::mt19937_64 rng(4);
  ParameterSet params;
  params.add_weight("a.W", 3, 5, rng);
  params.add_zeros("a.b", {1, 5});
  const auto path = temp_file("ckpt.bin");
  save_checkpoint(path, params, "{\"note\":1}");
  const Checkpoint ckpt = load_checkpoint(path);
  CHECK(ckpt.meta == "{\"note\":1}");
  REQUIRE(ckpt.params.size() == 2);
  ParameterSet other;
  std::mt19937_64 rng2(99);
  other.add_weight("a.W", 3, 5, rng2);
  other.add_zeros("a.b", {1, 5});
  restore_parameters(other, ckpt);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto x = params.entries()[i].second.values();
    const auto y = other.entries()[i].second.values();
    CHECK(std::equal(x.begin(), x.end(), y.begin(), y.end()));
  }
  // truncated file
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
  CHECK_THROWS_AS(load_checkpoint(path), ValidationError);
  std::ofstream(path) << "not a checkpoint";
  CHECK_THROWS_AS(load_checkpoint(path), ValidationError);
  std::filesystem::remove(path);
}
