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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "doctest.h"
#include "pathmpnn/error.hpp"
#include "pathmpnn/io.hpp"
#include "pathmpnn/synth.hpp"
#include "pathmpnn/training.hpp"

using namespace pmpnn;

namespace {

const std::filesystem::path kSource = PATHMPNN_SOURCE_DIR;

RegressionOptions quick_options(const MoleculeDataset& ds, FeatureMode mode, int length) {
  RegressionOptions o;
  o.model.hidden_dim = 12;
  o.model.steps = 2;
  o.model.set2set_steps = 2;
  o.model.max_path_length = length;
  o.model.mode = mode;
  o.featurizer = {ds.vocabulary, false, mode == FeatureMode::kSubstructure};
  o.epochs = 30;
  o.patience = 100;
  o.seed = 4;
  return o;
}

CitationGraph ring_of_cliques(std::uint64_t seed) {
  // Two communities with informative features, sparse bridges between them.
  const int n = 60;
  std::mt19937_64 rng(seed);
  std::vector<std::pair<int, int>> edges;
  std::bernoulli_distribution within(0.2), across(0.01);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if ((u % 2 == v % 2) ? within(rng) : across(rng)) edges.emplace_back(u, v);
    }
  }
  CitationGraph data;
  data.graph = Graph(n, edges);
  std::vector<double> x;
  std::bernoulli_distribution noise(0.3);
  for (int v = 0; v < n; ++v) {
    for (int f = 0; f < 8; ++f) x.push_back((f % 2 == v % 2) == noise(rng) ? 1.0 : 0.0);
  }
  data.graph.set_node_features(8, x);
  std::vector<int> labels;
  for (int v = 0; v < n; ++v) labels.push_back(v % 2);
  data.graph.set_labels(labels);
  data.class_names = {"even", "odd"};
  for (int v = 0; v < n; ++v) data.node_ids.push_back(std::to_string(v));
  assign_splits(data, 5, 15, 30, seed);
  return data;
}

}  // namespace

TEST_CASE("rmse loss values") {
  const Tensor a = Tensor::constant({3, 1}, {1, 2, 3});
  CHECK(rmse_loss(a, a).item() == 0.0);
  const Tensor b = Tensor::constant({3, 1}, {1.5, 2.5, 3.5});
  CHECK(rmse_loss(a, b).item() == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("mae and rmse metrics") {
  const std::vector<double> x = {1, 2, 3};
  CHECK(mae_metric(x, x) == 0.0);
  CHECK(mae_metric(std::vector<double>{3}, std::vector<double>{1}) == 2.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(17), t(17);
    for (double& v : p) v = g(rng);
    for (double& v : t) v = g(rng);
    double abs_sum = 0, sq_sum = 0;
    for (int i = 0; i < 17; ++i) {
      abs_sum += std::abs(p[i] - t[i]);
      sq_sum += (p[i] - t[i]) * (p[i] - t[i]);
    }
    CHECK(mae_metric(p, t) == doctest::Approx(abs_sum / 17).epsilon(1e-14));
    CHECK(rmse_metric(p, t) == doctest::Approx(std::sqrt(sq_sum / 17)).epsilon(1e-14));
  }
  CHECK(percent_error_metric(std::vector<double>{110, 5}, std::vector<double>{100, 0}) ==
        doctest::Approx(10.0));
}

TEST_CASE("dataset splits") {
  const std::vector<double> bad = {0.5, 0.3, 0.3};
  CHECK_THROWS_AS(split_dataset(10, bad, 1), ValidationError);
  const std::vector<double> f = {0.8, 0.1, 0.1};
  const DatasetSplit s = split_dataset(103, f, 7);
  std::set<int> all;
  for (const auto* part : {&s.train, &s.val, &s.test}) all.insert(part->begin(), part->end());
  CHECK(all.size() == 103);
  CHECK(s.train.size() + s.val.size() + s.test.size() == 103);
  CHECK(s.train.size() == 82);
  const DatasetSplit again = split_dataset(103, f, 7);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  CHECK(split_dataset(103, f, 8).train != s.train);
}

TEST_CASE("report round trip") {
  TrainReport r;
  r.task = "regression";
  r.val_metric_name = "val_mae";
  r.epochs = {{1, 0.123456789012345, 1.0 / 3.0}, {2, 0.1, 2.0 / 7.0}};
  r.best_epoch = 2;
  r.final_metrics = {{"test_mae", 0.1 + 0.2}, {"test_rmse", std::sqrt(2.0)}};
  r.wall_seconds = 1.25;
  r.seed = 18446744073709551557ull;
  r.config = {{"task", "regression"}, {"hidden_dim", 8}};
  const TrainReport back = TrainReport::from_jsonl(r.to_jsonl());
  CHECK(back == r);
  CHECK(back.to_jsonl() == r.to_jsonl());
  const std::string two = r.to_jsonl() + r.to_jsonl() + summary_json({r, r}).dump() + "\n";
  const auto parsed = parse_reports(two);
  CHECK(parsed.size() == 2);
  CHECK_THROWS_AS(TrainReport::from_jsonl(r.to_jsonl().substr(0, 40)), ValidationError);
}

TEST_CASE("summaries use the sample deviation") {
  std::vector<TrainReport> runs(3);
  const double values[] = {1.0, 2.0, 4.0};
  for (int i = 0; i < 3; ++i) runs[i].final_metrics["m"] = values[i];
  const MetricSummary s = summarize(runs, "m");
  CHECK(s.mean == doctest::Approx(7.0 / 3));
  CHECK(s.std == doctest::Approx(std::sqrt(((1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) +
                                            (4 - 7.0 / 3) * (4 - 7.0 / 3)) / 2)));
}

TEST_CASE("target scaler") {
  std::vector<MoleculeRecord> records(4);
  const double ys[] = {1, 3, 5, 100};
  for (int i = 0; i < 4; ++i) records[i].targets = {ys[i]};
  const std::vector<int> rows = {0, 1, 2};
  const TargetScaler s = TargetScaler::fit(records, rows, true, 1);
  CHECK(s.mean[0] == doctest::Approx(3.0));
  CHECK(s.scale[0] == doctest::Approx(std::sqrt(8.0 / 3)));
  CHECK(s.inverse(s.forward(42.0, 0), 0) == doctest::Approx(42.0));
  const TargetScaler back = TargetScaler::from_json(s.to_json());
  CHECK(back.mean == s.mean);
  CHECK(back.scale == s.scale);
  const TargetScaler off = TargetScaler::fit(records, rows, false, 1);
  CHECK(off.forward(7.0, 0) == 7.0);
}

TEST_CASE("regression training sanity") {
  const MoleculeDataset ds = generate_alcohol_count(60, 21);
  const RegressionResult r = train_regression(ds, quick_options(ds, FeatureMode::kSubstructure, 2));
  REQUIRE(r.report.epochs.size() == 30);
  CHECK(r.report.epochs[29].train_loss < r.report.epochs[0].train_loss);
  for (std::size_t i = 0; i < r.report.epochs.size(); ++i) CHECK(r.report.epochs[i].epoch == static_cast<int>(i) + 1);
  // the restored model is the best one seen on validation
  double best = 1e300;
  for (const auto& e : r.report.epochs) best = std::min(best, e.val_metric);
  CHECK(r.report.metric("best_val_mae") == best);
  std::vector<MoleculeRecord> val;
  std::vector<double> truth;
  for (int i : r.split.val) {
    val.push_back(ds.records[i]);
    truth.push_back(ds.records[i].targets[0]);
  }
  const auto pred = predict_regression(r.model, quick_options(ds, FeatureMode::kSubstructure, 2).featurizer,
                                       r.scaler, val);
  std::vector<double> flat;
  for (const auto& row : pred) flat.push_back(row[0]);
  CHECK(mae_metric(flat, truth) == doctest::Approx(best).epsilon(1e-12));
  for (const char* name : {"test_mae", "test_rmse", "test_percent_error", "baseline_mae", "baseline_rmse"}) {
    CHECK(std::isfinite(r.report.metric(name)));
  }
}

TEST_CASE("regression is deterministic") {
  const MoleculeDataset ds = generate_dihedral_sum(30, 2);
  RegressionOptions o = quick_options(ds, FeatureMode::kGeometry, 3);
  o.epochs = 4;
  RegressionResult a = train_regression(ds, o);
  RegressionResult b = train_regression(ds, o);
  a.report.wall_seconds = b.report.wall_seconds = 0;
  CHECK(a.report == b.report);
}

TEST_CASE("empty splits are rejected") {
  const MoleculeDataset ds = generate_alcohol_count(5, 1);
  RegressionOptions o = quick_options(ds, FeatureMode::kBase, 1);
  o.split = {1.0, 0.0, 0.0};
  CHECK_THROWS_AS(train_regression(ds, o), ValidationError);
}

TEST_CASE("node classification on a two-community graph") {
  const CitationGraph data = ring_of_cliques(3);
  NodeClassificationOptions o;
  o.seed = 2;
  o.epochs = 100;
  for (bool plain : {true, false}) {
    o.plain_gcn = plain;
    NodeClassificationResult a = train_node_classification(data, o);
    NodeClassificationResult b = train_node_classification(data, o);
    a.report.wall_seconds = b.report.wall_seconds = 0;
    CHECK(a.report == b.report);
    CHECK(a.report.metric("test_accuracy") > 0.8);
    double best = -1;
    for (const auto& e : a.report.epochs) best = std::max(best, e.val_metric);
    CHECK(a.report.metric("best_val_accuracy") == best);
  }
}

TEST_CASE("citation training fits the labelled nodes") {
  const auto dir = kSource / "data/cora";
  if (!std::filesystem::exists(dir / "cora.content")) return;
  CitationGraph data = parse_citation_files(dir / "cora.content", dir / "cora.cites");
  assign_splits(data, 20, 500, 1000, 0);
  NodeClassificationOptions o;
  o.plain_gcn = true;
  o.seed = 0;
  const NodeClassificationResult r = train_node_classification(data, o);
  CHECK(r.report.epochs.size() <= 200);
  CHECK(r.report.metric("train_accuracy") == 1.0);
}
