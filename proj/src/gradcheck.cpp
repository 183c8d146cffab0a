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

#include "pathmpnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "pathmpnn/citation.hpp"
#include "pathmpnn/error.hpp"
#include "pathmpnn/training.hpp"

namespace pmpnn {

namespace {

// Values bounded away from zero so relu-type kinks stay outside the
// finite-difference stencil.
Tensor random_param(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> values(static_cast<std::size_t>(shape.rows) * shape.cols);
  for (double& x : values) {
    do {
      x = dist(rng);
    } while (std::abs(x) < 0.05 && lo < 0.0);
  }
  return Tensor::parameter(shape, std::move(values));
}

Tensor random_constant(Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> values(static_cast<std::size_t>(shape.rows) * shape.cols);
  for (double& x : values) x = dist(rng);
  return Tensor::constant(shape, std::move(values));
}

// Reduces an arbitrary output to a scalar with fixed random weights, so that
// every output entry carries a distinct gradient.
Tensor project(const Tensor& out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sum(mul(out, random_constant(out.shape(), rng)));
}

using Case = std::function<GradcheckResult(std::uint64_t)>;

Case unary_case(const std::string& name, Tensor (*op)(const Tensor&), double lo = -2.0,
                double hi = 2.0) {
  return [=](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Tensor a = random_param({3, 4}, rng, lo, hi);
    return check_gradients(name, [=] { return project(op(a), seed + 1); }, {a});
  };
}

const std::map<std::string, Case>& cases() {
  static const std::map<std::string, Case> table = {
      {"matmul",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({3, 4}, rng);
         const Tensor b = random_param({4, 2}, rng);
         return check_gradients("matmul", [=] { return project(matmul(a, b), seed + 1); }, {a, b});
       }},
      {"add",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({3, 4}, rng);
         const Tensor b = random_param({3, 4}, rng);
         const Tensor row = random_param({1, 4}, rng);
         return check_gradients(
             "add", [=] { return project(add(add(a, b), row), seed + 1); }, {a, b, row});
       }},
      {"sub",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({3, 4}, rng);
         const Tensor b = random_param({1, 4}, rng);
         return check_gradients("sub", [=] { return project(sub(a, b), seed + 1); }, {a, b});
       }},
      {"mul",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({3, 4}, rng);
         const Tensor b = random_param({3, 4}, rng);
         const Tensor col = random_param({3, 1}, rng);
         const Tensor row = random_param({1, 4}, rng);
         return check_gradients(
             "mul", [=] { return project(mul(mul(mul(a, b), col), row), seed + 1); },
             {a, b, col, row});
       }},
      {"scale",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({2, 3}, rng);
         return check_gradients("scale", [=] { return project(scale(a, -1.7), seed + 1); }, {a});
       }},
      {"concat",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({2, 3}, rng);
         const Tensor b = random_param({2, 2}, rng);
         const Tensor c = random_param({1, 5}, rng);
         return check_gradients(
             "concat", [=] { return project(concat({concat({a, b}, 1), c}, 0), seed + 1); },
             {a, b, c});
       }},
      {"slice_cols",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({3, 5}, rng);
         return check_gradients("slice_cols",
                                [=] { return project(slice_cols(a, 1, 3), seed + 1); }, {a});
       }},
      {"transpose",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({3, 5}, rng);
         return check_gradients("transpose", [=] { return project(transpose(a), seed + 1); }, {a});
       }},
      {"sigmoid", unary_case("sigmoid", &sigmoid)},
      {"tanh", unary_case("tanh", &tanh)},
      {"relu", unary_case("relu", &relu)},
      {"leaky_relu",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({3, 4}, rng, -2.0, 2.0);
         return check_gradients("leaky_relu",
                                [=] { return project(leaky_relu(a, 0.2), seed + 1); }, {a});
       }},
      {"square", unary_case("square", &square)},
      {"sqrt", unary_case("sqrt", &sqrt, 0.5, 3.0)},
      {"sum",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({3, 4}, rng);
         return check_gradients("sum", [=] { return square(sum(a)); }, {a});
       }},
      {"mean",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({3, 4}, rng);
         return check_gradients("mean", [=] { return square(mean(a)); }, {a});
       }},
      {"softmax",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({3, 4}, rng);
         return check_gradients(
             "softmax",
             [=] { return add(project(softmax(a, 0), seed + 1), project(softmax(a, 1), seed + 2)); },
             {a});
       }},
      {"gather_rows",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({4, 3}, rng);
         const std::vector<int> idx = {2, 0, 2, 3};
         return check_gradients("gather_rows",
                                [=] { return project(gather_rows(a, idx), seed + 1); }, {a});
       }},
      {"segment_sum",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({5, 3}, rng);
         const std::vector<int> seg = {1, 0, 1, 3, 1};
         const std::vector<double> w = {0.5, -1.0, 2.0, 0.25, 1.5};
         return check_gradients(
             "segment_sum",
             [=] {
               return add(project(segment_sum(a, seg, 4), seed + 1),
                          project(segment_sum(a, seg, 4, w), seed + 2));
             },
             {a});
       }},
      {"segment_softmax",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({6, 1}, rng);
         const std::vector<int> seg = {0, 2, 0, 0, 2, 1};
         return check_gradients(
             "segment_softmax",
             [=] { return project(segment_softmax(a, seg, 3), seed + 1); }, {a});
       }},
      {"softmax_cross_entropy",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({4, 3}, rng);
         const std::vector<int> labels = {2, 0, 1, 1};
         const std::vector<int> rows = {0, 1, 3};
         return check_gradients("softmax_cross_entropy",
                                [=] { return softmax_cross_entropy(a, labels, rows); }, {a});
       }},
      {"dropout",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({4, 5}, rng);
         return check_gradients(
             "dropout",
             [=] {
               std::mt19937_64 mask(seed + 3);  // same mask on every evaluation
               return project(dropout(a, 0.5, mask), seed + 1);
             },
             {a});
       }},
      {"lstm_cell",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor x = random_param({2, 3}, rng);
         const Tensor h = random_param({2, 2}, rng);
         const Tensor c = random_param({2, 2}, rng);
         const Tensor wx = random_param({3, 8}, rng);
         const Tensor wh = random_param({2, 8}, rng);
         const Tensor b = random_param({1, 8}, rng);
         return check_gradients(
             "lstm_cell",
             [=] {
               const LstmState s = lstm_cell(x, {h, c}, wx, wh, b);
               return add(project(s.h, seed + 1), project(s.c, seed + 2));
             },
             {x, h, c, wx, wh, b});
       }},
      {"shared_use",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor a = random_param({3, 3}, rng);
         return check_gradients(
             "shared_use", [=] { return project(add(matmul(a, a), tanh(a)), seed + 1); }, {a});
       }},
      {"rmse_loss",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor p = random_param({4, 2}, rng);
         const Tensor t = random_constant({4, 2}, rng);
         return check_gradients("rmse_loss", [=] { return rmse_loss(p, t); }, {p});
       }},
      {"message_standard",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor hv = random_param({3, 2}, rng);
         const Tensor hw = random_param({3, 2}, rng);
         const Tensor e = random_param({3, 4}, rng);
         const Tensor w = random_param({8, 2}, rng);
         const Tensor b = random_param({1, 2}, rng);
         return check_gradients(
             "message_standard",
             [=] { return project(message_standard(hv, hw, e, {w, b}), seed + 1); },
             {hv, hw, e, w, b});
       }},
      {"attention_aggregate",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor h = random_param({3, 2}, rng);
         const Tensor m = random_param({5, 2}, rng);
         const Tensor a1 = random_param({4, 1}, rng);
         const Tensor a2 = random_param({4, 1}, rng);
         const std::vector<int> roots = {0, 0, 2, 0, 2};
         return check_gradients(
             "attention_aggregate",
             [=] {
               const std::vector<Tensor> heads = {a1, a2};
               return project(attention_aggregate(h, m, roots, heads, 0.2), seed + 1);
             },
             {h, m, a1, a2});
       }},
      {"node_update",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor h = random_param({3, 2}, rng);
         const Tensor m = random_param({3, 2}, rng);
         const Tensor w = random_param({4, 2}, rng);
         const Tensor b = random_param({1, 2}, rng);
         return check_gradients(
             "node_update", [=] { return project(node_update(h, m, {w, b}), seed + 1); },
             {h, m, w, b});
       }},
      {"set2set_readout",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Tensor h = random_param({4, 2}, rng);
         const Tensor x = random_constant({4, 3}, rng);
         const Tensor mw = random_param({5, 2}, rng);
         const Tensor mb = random_param({1, 2}, rng);
         const Tensor wx = random_param({4, 8}, rng);
         const Tensor wh = random_param({2, 8}, rng);
         const Tensor b = random_param({1, 8}, rng);
         return check_gradients(
             "set2set_readout",
             [=] {
               return project(set2set_readout(h, x, {{mw, mb}, wx, wh, b}, 3), seed + 1);
             },
             {h, mw, mb, wx, wh, b});
       }},
      {"gcn_layer",
       [](std::uint64_t seed) {
         std::mt19937_64 rng(seed);
         const Graph g(4, {{0, 1}, {1, 2}, {1, 3}});
         const NormalizedAdjacency adj = normalize_adjacency(g);
         const Tensor h = random_param({4, 3}, rng);
         const Tensor w = random_param({3, 2}, rng);
         const Tensor b = random_param({1, 2}, rng);
         return check_gradients(
             "gcn_layer",
             [=] {
               return add(project(gcn_layer(h, adj, {w, b}, true), seed + 1),
                          project(gcn_layer(h, adj, {w, b}, false), seed + 2));
             },
             {h, w, b});
       }},
  };
  return table;
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

GradcheckResult check_gradients(const std::string& name, const std::function<Tensor()>& loss,
                                const std::vector<Tensor>& inputs, double step) {
  GradcheckResult result;
  result.name = name;
  for (Tensor t : inputs) t.zero_grad();
  const Tensor value = loss();
  backward(value);
  std::vector<std::vector<double>> analytic;
  for (const Tensor& t : inputs) analytic.push_back(t.grad());

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Tensor input = inputs[i];
    const std::span<double> values = input.mutable_values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double saved = values[k];
      values[k] = saved + step;
      const double plus = loss().item();
      values[k] = saved - step;
      const double minus = loss().item();
      values[k] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      result.max_relative_error =
          std::max(result.max_relative_error, relative_error(analytic[i][k], numeric));
      ++result.entries;
    }
  }
  for (Tensor t : inputs) t.zero_grad();
  result.passed = result.max_relative_error < kGradcheckTolerance;
  return result;
}

std::vector<std::string> gradcheck_op_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : cases()) names.push_back(name);
  return names;
}

GradcheckResult gradcheck_op(const std::string& name, std::uint64_t seed) {
  const auto it = cases().find(name);
  if (it == cases().end()) throw ValidationError("unknown gradcheck op '" + name + "'");
  return it->second(seed);
}

std::vector<GradcheckResult> gradcheck_all_ops(std::uint64_t seed) {
  std::vector<GradcheckResult> out;
  for (const auto& [name, run] : cases()) out.push_back(run(seed));
  return out;
}

MoleculeRecord gradcheck_molecule() {
  // C0-C1(-O4)-C2-N3: a bent, non-planar chain with a branch on C1.
  MoleculeRecord r;
  r.id = "gradcheck";
  r.atoms = {{"C", Vec3{0.0, 0.0, 0.0}},
             {"C", Vec3{1.52, 0.0, 0.0}},
             {"C", Vec3{2.05, 1.42, 0.0}},
             {"N", Vec3{3.50, 1.55, 0.62}},
             {"O", Vec3{2.01, -0.71, -1.12}}};
  r.bonds = {{0, 1, BondOrder::kSingle},
             {1, 2, BondOrder::kSingle},
             {2, 3, BondOrder::kDouble},
             {1, 4, BondOrder::kSingle}};
  r.targets = {0.0, 0.0};
  return r;
}

GradcheckResult gradcheck_model(FeatureMode mode, std::uint64_t seed) {
  FeaturizerConfig featurizer;
  featurizer.vocabulary = {"C", "N", "O"};
  featurizer.ring_flags = true;
  const Graph graph = build_graph(gradcheck_molecule(), featurizer);

  ModelConfig config;
  config.hidden_dim = 6;
  config.steps = 2;
  config.max_path_length = 3;
  config.mode = mode;
  config.set2set_steps = 2;
  config.num_targets = 2;
  config.seed = seed;
  PathMpnn model(config, graph.node_feature_width(), graph.edge_feature_width());
  // Biases start at zero; randomise them too so their gradients are exercised.
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> dist(-0.3, 0.3);
  std::vector<Tensor> inputs;
  for (const auto& [name, tensor] : model.parameters().entries()) {
    Tensor t = tensor;
    for (double& x : t.mutable_values()) {
      if (x == 0.0) x = dist(rng);
    }
    inputs.push_back(t);
  }
  const PreparedGraph prepared = model.prepare(graph);
  GradcheckResult r = check_gradients(
      std::string("full-model/") + std::string(to_string(mode)),
      [&] { return project(model.forward(prepared), seed + 2); }, inputs);
  return r;
}

std::vector<GradcheckResult> gradcheck_full_model(std::uint64_t seed) {
  return {gradcheck_model(FeatureMode::kBase, seed),
          gradcheck_model(FeatureMode::kSubstructure, seed),
          gradcheck_model(FeatureMode::kGeometry, seed)};
}

}  // namespace pmpnn
