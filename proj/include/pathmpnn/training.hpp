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

#ifndef PATHMPNN_TRAINING_HPP_
#define PATHMPNN_TRAINING_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pathmpnn/citation.hpp"
#include "pathmpnn/io.hpp"
#include "pathmpnn/model.hpp"
#include "pathmpnn/optim.hpp"

namespace pmpnn {

// sqrt(mean((pred - target)^2)) as a differentiable scalar.
Tensor rmse_loss(const Tensor& pred, const Tensor& target);
double mae_metric(std::span<const double> pred, std::span<const double> target);
double rmse_metric(std::span<const double> pred, std::span<const double> target);
// Mean of |pred - target| / |target| in percent, over entries with a nonzero target.
double percent_error_metric(std::span<const double> pred, std::span<const double> target);

struct DatasetSplit {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// Seeded shuffle, then consecutive blocks of floor(f * n) for train and val;
// test takes the rest. Fractions must be non-negative and sum to 1.
DatasetSplit split_dataset(int num_records, std::span<const double> fractions, std::uint64_t seed);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainReport {
  std::string task;
  // "val_mae" (lower is better) or "val_accuracy" (higher is better).
  std::string val_metric_name;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  // test_mae, test_rmse, test_percent_error, baseline_rmse, test_accuracy, ...
  std::map<std::string, double> final_metrics;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json config;

  // One {"epoch": ...} object per line, then a {"final": ...} object.
  std::string to_jsonl() const;
  static TrainReport from_jsonl(std::string_view text);
  double metric(const std::string& name) const;

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

// Mean and sample standard deviation of one final metric across repeats.
struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
};
MetricSummary summarize(const std::vector<TrainReport>& reports, const std::string& metric);

// Report files written with --repeats hold several reports back to back and a
// trailing {"summary": ...} line, which is skipped here.
std::vector<TrainReport> parse_reports(std::string_view text);
nlohmann::json summary_json(const std::vector<TrainReport>& reports);

// Per-target standardisation fitted on the training split.
struct TargetScaler {
  std::vector<double> mean;
  std::vector<double> scale;

  static TargetScaler fit(const std::vector<MoleculeRecord>& records, std::span<const int> rows,
                          bool enabled, int num_targets);
  double forward(double y, int target) const { return (y - mean[target]) / scale[target]; }
  double inverse(double z, int target) const { return z * scale[target] + mean[target]; }
  nlohmann::json to_json() const;
  static TargetScaler from_json(const nlohmann::json& j);
};

struct RegressionOptions {
  ModelConfig model;
  FeaturizerConfig featurizer;
  AdamOptions adam;
  int epochs = 300;
  int batch_size = 16;
  int patience = 25;
  std::array<double, 3> split = {0.8, 0.1, 0.1};
  bool standardize_targets = true;
  // Seeds the split, the initialisation and the batch order.
  std::uint64_t seed = 0;
};

struct RegressionResult {
  TrainReport report;
  PathMpnn model;
  TargetScaler scaler;
  DatasetSplit split;
};

// Mini-batch Adam on the batch RMSE of standardised targets, early stopping on
// validation MAE, best-validation parameters restored before testing. Throws
// ValidationError when any split is empty.
RegressionResult train_regression(const MoleculeDataset& dataset, const RegressionOptions& options);

// Predictions in original target units, one row per record.
std::vector<std::vector<double>> predict_regression(const PathMpnn& model,
                                                    const FeaturizerConfig& featurizer,
                                                    const TargetScaler& scaler,
                                                    const std::vector<MoleculeRecord>& records);

struct NodeClassificationOptions {
  PathGcnConfig gcn;
  // Plain GCN forward pass over the same parameter layout.
  bool plain_gcn = false;
  AdamOptions adam{.lr = 0.01, .weight_decay = 5e-4};
  int epochs = 200;
  int patience = 200;
  std::uint64_t seed = 0;
};

struct NodeClassificationResult {
  TrainReport report;
  PathGcn model;
};

// Full-batch training on data.train, early stopping on validation accuracy.
// Weight decay applies to the first layer only.
NodeClassificationResult train_node_classification(const CitationGraph& data,
                                                   const NodeClassificationOptions& options);

double accuracy(const Tensor& logits, std::span<const int> labels, std::span<const int> rows);

// Seed for the path samples averaged at evaluation time in a run seeded `seed`.
std::uint64_t eval_sample_seed(std::uint64_t seed);

// Runs a whole RunConfig once with the given seed: loads the data, trains and
// returns the report with the config snapshot attached. Writes the checkpoint
// when the config names one.
TrainReport run_training(const RunConfig& config, std::uint64_t seed);

}  // namespace pmpnn

#endif  // PATHMPNN_TRAINING_HPP_
