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

#include "pathmpnn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "pathmpnn/error.hpp"

namespace pmpnn {

using nlohmann::json;

namespace {

void check_pair(std::span<const double> pred, std::span<const double> target, const char* what) {
  if (pred.size() != target.size()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(pred.size()) + " predictions vs " +
                     std::to_string(target.size()) + " targets");
  }
  if (pred.empty()) throw ValidationError(std::string(what) + ": no values");
}

void check_finite(double x, const std::string& what) {
  if (!std::isfinite(x)) throw NumericError(what + " is not finite");
}

// Fixed offsets so the split, the batch order and the dropout masks draw from
// unrelated streams of one seed.
constexpr std::uint64_t kOrderStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kDropoutStream = 0xbf58476d1ce4e5b9ULL;
constexpr std::uint64_t kSampleStream = 0x94d049bb133111ebULL;
constexpr std::uint64_t kEvalStream = 0x2545f4914f6cdd1dULL;

}  // namespace

Tensor rmse_loss(const Tensor& pred, const Tensor& target) {
  return sqrt(mean(square(sub(pred, target))));
}

double mae_metric(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target, "mae");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += std::abs(pred[i] - target[i]);
  return total / static_cast<double>(pred.size());
}

double rmse_metric(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target, "rmse");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += (pred[i] - target[i]) * (pred[i] - target[i]);
  return std::sqrt(total / static_cast<double>(pred.size()));
}

double percent_error_metric(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target, "percent error");
  double total = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (target[i] == 0.0) continue;
    total += std::abs(pred[i] - target[i]) / std::abs(target[i]);
    ++count;
  }
  return count == 0 ? 0.0 : 100.0 * total / count;
}

DatasetSplit split_dataset(int num_records, std::span<const double> fractions, std::uint64_t seed) {
  if (fractions.size() != 3) throw ValidationError("split needs three fractions");
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw ValidationError("split fractions must be non-negative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("split fractions must sum to 1");
  if (num_records < 0) throw ValidationError("negative record count");

  std::vector<int> order(num_records);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::floor(fractions[0] * num_records));
  const auto n_val = static_cast<std::size_t>(std::floor(fractions[1] * num_records));
  DatasetSplit out;
  out.train.assign(order.begin(), order.begin() + n_train);
  out.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  out.test.assign(order.begin() + n_train + n_val, order.end());
  return out;
}

std::string TrainReport::to_jsonl() const {
  std::ostringstream out;
  for (const auto& e : epochs) {
    json j;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j[val_metric_name] = e.val_metric;
    out << j.dump() << '\n';
  }
  json f;
  f["task"] = task;
  f["val_metric"] = val_metric_name;
  f["best_epoch"] = best_epoch;
  f["metrics"] = final_metrics;
  f["wall_seconds"] = wall_seconds;
  f["seed"] = seed;
  f["config"] = config;
  json wrapper;
  wrapper["final"] = f;
  out << wrapper.dump() << '\n';
  return out.str();
}

TrainReport TrainReport::from_jsonl(std::string_view text) {
  TrainReport report;
  std::vector<json> epoch_lines;
  bool have_final = false;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError("report line " + std::to_string(line_number) + ": " + e.what());
    }
    if (have_final) {
      throw ValidationError("report line " + std::to_string(line_number) + ": data after final block");
    }
    if (j.contains("final")) {
      const json& f = j["final"];
      report.task = f.at("task").get<std::string>();
      report.val_metric_name = f.at("val_metric").get<std::string>();
      report.best_epoch = f.at("best_epoch").get<int>();
      report.final_metrics = f.at("metrics").get<std::map<std::string, double>>();
      report.wall_seconds = f.at("wall_seconds").get<double>();
      report.seed = f.at("seed").get<std::uint64_t>();
      report.config = f.at("config");
      have_final = true;
    } else {
      epoch_lines.push_back(std::move(j));
    }
  }
  if (!have_final) throw ValidationError("report has no final block (truncated?)");
  for (const auto& j : epoch_lines) {
    report.epochs.push_back({j.at("epoch").get<int>(), j.at("train_loss").get<double>(),
                             j.at(report.val_metric_name).get<double>()});
  }
  return report;
}

double TrainReport::metric(const std::string& name) const {
  const auto it = final_metrics.find(name);
  if (it == final_metrics.end()) throw ValidationError("report has no metric '" + name + "'");
  return it->second;
}

MetricSummary summarize(const std::vector<TrainReport>& reports, const std::string& metric) {
  MetricSummary s;
  if (reports.empty()) return s;
  for (const auto& r : reports) s.mean += r.metric(metric);
  s.mean /= static_cast<double>(reports.size());
  if (reports.size() > 1) {
    double ss = 0.0;
    for (const auto& r : reports) ss += (r.metric(metric) - s.mean) * (r.metric(metric) - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(reports.size() - 1));
  }
  return s;
}

std::vector<TrainReport> parse_reports(std::string_view text) {
  std::vector<TrainReport> out;
  std::string chunk;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.rfind("{\"summary\"", 0) == 0) continue;
    chunk += line;
    chunk += '\n';
    if (line.rfind("{\"final\"", 0) == 0) {
      out.push_back(TrainReport::from_jsonl(chunk));
      chunk.clear();
    }
  }
  if (!chunk.empty()) throw ValidationError("report file ends without a final block (truncated?)");
  return out;
}

json summary_json(const std::vector<TrainReport>& reports) {
  json metrics = json::object();
  if (!reports.empty()) {
    for (const auto& [name, _] : reports.front().final_metrics) {
      const MetricSummary s = summarize(reports, name);
      metrics[name] = {{"mean", s.mean}, {"std", s.std}};
    }
  }
  json seeds = json::array();
  for (const auto& r : reports) seeds.push_back(r.seed);
  return json{{"summary", {{"runs", reports.size()}, {"seeds", seeds}, {"metrics", metrics}}}};
}

TargetScaler TargetScaler::fit(const std::vector<MoleculeRecord>& records, std::span<const int> rows,
                               bool enabled, int num_targets) {
  TargetScaler s;
  s.mean.assign(num_targets, 0.0);
  s.scale.assign(num_targets, 1.0);
  if (!enabled || rows.empty()) return s;
  for (int t = 0; t < num_targets; ++t) {
    double m = 0.0;
    for (int r : rows) m += records[r].targets[t];
    m /= static_cast<double>(rows.size());
    double var = 0.0;
    for (int r : rows) var += (records[r].targets[t] - m) * (records[r].targets[t] - m);
    var /= static_cast<double>(rows.size());
    s.mean[t] = m;
    s.scale[t] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  return s;
}

json TargetScaler::to_json() const { return json{{"mean", mean}, {"scale", scale}}; }

TargetScaler TargetScaler::from_json(const json& j) {
  TargetScaler s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  if (s.mean.size() != s.scale.size()) throw ValidationError("scaler mean/scale size mismatch");
  return s;
}

namespace {

int target_count(const MoleculeDataset& dataset) {
  if (dataset.records.empty()) throw ValidationError("dataset has no records");
  const auto t = dataset.records.front().targets.size();
  if (t == 0) throw ValidationError("records carry no targets");
  return static_cast<int>(t);
}

std::vector<double> flat_targets(const std::vector<MoleculeRecord>& records, std::span<const int> rows) {
  std::vector<double> out;
  for (int r : rows) out.insert(out.end(), records[r].targets.begin(), records[r].targets.end());
  return out;
}

std::vector<double> flat_predictions(const PathMpnn& model, const std::vector<PreparedGraph>& prepared,
                                     const TargetScaler& scaler, std::span<const int> rows) {
  std::vector<double> out;
  for (int r : rows) {
    const Tensor y = model.forward(prepared[r]);
    for (int t = 0; t < y.cols(); ++t) out.push_back(scaler.inverse(y.at(0, t), t));
  }
  return out;
}

}  // namespace

RegressionResult train_regression(const MoleculeDataset& dataset, const RegressionOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const int num_targets = target_count(dataset);
  const auto& records = dataset.records;
  if (options.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (options.epochs < 1) throw ValidationError("epochs must be >= 1");
  if (options.patience < 1) throw ValidationError("patience must be >= 1");

  DatasetSplit split = split_dataset(static_cast<int>(records.size()), options.split, options.seed);
  if (split.train.empty() || split.val.empty() || split.test.empty()) {
    throw ValidationError("empty split: " + std::to_string(split.train.size()) + "/" +
                          std::to_string(split.val.size()) + "/" +
                          std::to_string(split.test.size()) + " train/val/test records");
  }

  FeaturizerConfig featurizer = options.featurizer;
  if (featurizer.vocabulary.empty()) featurizer.vocabulary = dataset.vocabulary;
  featurizer.explicit_hydrogens = options.model.explicit_hydrogens;

  ModelConfig config = options.model;
  config.num_targets = num_targets;
  config.seed = options.seed;

  std::vector<Graph> graphs;
  graphs.reserve(records.size());
  for (const auto& r : records) graphs.push_back(build_graph(r, featurizer));

  PathMpnn model(config, graphs.front().node_feature_width(), graphs.front().edge_feature_width());
  std::vector<PreparedGraph> prepared;
  prepared.reserve(graphs.size());
  for (const auto& g : graphs) prepared.push_back(model.prepare(g));

  const TargetScaler scaler =
      TargetScaler::fit(records, split.train, options.standardize_targets, num_targets);
  std::vector<std::vector<double>> scaled(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (int t = 0; t < num_targets; ++t) scaled[r].push_back(scaler.forward(records[r].targets[t], t));
  }

  ParameterSet& params = model.parameters();
  Adam adam(params, options.adam);
  std::mt19937_64 order_rng(options.seed ^ kOrderStream);
  std::vector<int> order = split.train;
  const std::vector<double> val_targets = flat_targets(records, split.val);

  TrainReport report;
  report.task = "regression";
  report.val_metric_name = "val_mae";
  report.seed = options.seed;
  double best_val = std::numeric_limits<double>::infinity();
  ParameterSet best = params.clone();
  int since_best = 0;

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double loss_total = 0.0;
    int batches = 0;
    for (std::size_t b = 0; b < order.size(); b += options.batch_size) {
      const std::size_t e = std::min(order.size(), b + options.batch_size);
      std::vector<Tensor> preds;
      std::vector<double> target_values;
      for (std::size_t i = b; i < e; ++i) {
        preds.push_back(model.forward(prepared[order[i]]));
        target_values.insert(target_values.end(), scaled[order[i]].begin(), scaled[order[i]].end());
      }
      const int rows = static_cast<int>(e - b);
      const Tensor loss = rmse_loss(concat(preds, 0),
                                    Tensor::constant({rows, num_targets}, std::move(target_values)));
      check_finite(loss.item(), "training loss");
      params.zero_grad();
      backward(loss);
      adam.step();
      loss_total += loss.item();
      ++batches;
    }
    const double val_mae = mae_metric(flat_predictions(model, prepared, scaler, split.val), val_targets);
    check_finite(val_mae, "validation MAE");
    report.epochs.push_back({epoch, loss_total / batches, val_mae});
    if (val_mae < best_val) {
      best_val = val_mae;
      best.assign(params);
      report.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= options.patience) {
      break;
    }
  }
  params.assign(best);

  const std::vector<double> test_targets = flat_targets(records, split.test);
  const std::vector<double> test_pred = flat_predictions(model, prepared, scaler, split.test);
  // Constant predictor: per-target training mean.
  std::vector<double> baseline;
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    for (int t = 0; t < num_targets; ++t) {
      double m = 0.0;
      for (int r : split.train) m += records[r].targets[t];
      baseline.push_back(m / static_cast<double>(split.train.size()));
    }
  }
  report.final_metrics["best_val_mae"] = best_val;
  report.final_metrics["test_mae"] = mae_metric(test_pred, test_targets);
  report.final_metrics["test_rmse"] = rmse_metric(test_pred, test_targets);
  report.final_metrics["test_percent_error"] = percent_error_metric(test_pred, test_targets);
  report.final_metrics["baseline_mae"] = mae_metric(baseline, test_targets);
  report.final_metrics["baseline_rmse"] = rmse_metric(baseline, test_targets);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(report), std::move(model), scaler, std::move(split)};
}

std::vector<std::vector<double>> predict_regression(const PathMpnn& model,
                                                    const FeaturizerConfig& featurizer,
                                                    const TargetScaler& scaler,
                                                    const std::vector<MoleculeRecord>& records) {
  std::vector<std::vector<double>> out;
  for (const auto& r : records) {
    const Tensor y = model.forward(build_graph(r, featurizer));
    std::vector<double> row;
    for (int t = 0; t < y.cols(); ++t) row.push_back(scaler.inverse(y.at(0, t), t));
    out.push_back(std::move(row));
  }
  return out;
}

double accuracy(const Tensor& logits, std::span<const int> labels, std::span<const int> rows) {
  if (rows.empty()) throw ValidationError("accuracy over an empty node set");
  int correct = 0;
  for (int r : rows) {
    int best = 0;
    for (int c = 1; c < logits.cols(); ++c) {
      if (logits.at(r, c) > logits.at(r, best)) best = c;
    }
    if (best == labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

std::uint64_t eval_sample_seed(std::uint64_t seed) { return seed ^ kEvalStream; }

NodeClassificationResult train_node_classification(const CitationGraph& data,
                                                   const NodeClassificationOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  data.validate();
  if (data.train.empty() || data.val.empty() || data.test.empty()) {
    throw ValidationError("citation splits must all be non-empty");
  }
  if (options.epochs < 1 || options.patience < 1) {
    throw ValidationError("epochs and patience must be >= 1");
  }
  PathGcnConfig config = options.gcn;
  config.seed = options.seed;
  if (options.plain_gcn) config.per_hop = 0;
  PathGcn model(config, data.graph.node_feature_width(), data.num_classes());

  const Tensor features = citation_features(data);
  const NormalizedAdjacency adjacency = normalize_adjacency(data.graph);
  const auto& labels = data.graph.labels();

  ParameterSet& params = model.parameters();
  Adam adam(params, options.adam);
  adam.set_decay_prefix("l1.");
  std::mt19937_64 dropout_rng(options.seed ^ kDropoutStream);
  std::mt19937_64 sample_rng(options.seed ^ kSampleStream);

  auto logits_for = [&](bool training, const SampledPaths* paths) {
    if (options.plain_gcn) {
      return gcn_forward(params, features, adjacency, config.dropout, training, dropout_rng);
    }
    return model.forward(features, adjacency, paths, training, dropout_rng);
  };
  auto evaluate = [&]() {
    if (options.plain_gcn) return logits_for(false, nullptr);
    return model.predict(features, data.graph, adjacency, eval_sample_seed(options.seed));
  };

  SampledPaths fixed;
  if (config.uses_paths() && !config.resample_each_epoch) {
    fixed = sample_citation_paths(data.graph, adjacency, config, sample_rng);
  }

  TrainReport report;
  report.task = "node-classification";
  report.val_metric_name = "val_accuracy";
  report.seed = options.seed;
  double best_val = -1.0;
  ParameterSet best = params.clone();
  int since_best = 0;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    SampledPaths sampled;
    const SampledPaths* paths = nullptr;
    if (config.uses_paths()) {
      if (config.resample_each_epoch) {
        sampled = sample_citation_paths(data.graph, adjacency, config, sample_rng);
        paths = &sampled;
      } else {
        paths = &fixed;
      }
    }
    const Tensor loss = softmax_cross_entropy(logits_for(true, paths), labels, data.train);
    check_finite(loss.item(), "training loss");
    params.zero_grad();
    backward(loss);
    adam.step();

    const double val_acc = accuracy(evaluate(), labels, data.val);
    report.epochs.push_back({epoch, loss.item(), val_acc});
    if (val_acc > best_val) {
      best_val = val_acc;
      best.assign(params);
      report.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= options.patience) {
      break;
    }
  }
  params.assign(best);
  const Tensor logits = evaluate();
  report.final_metrics["best_val_accuracy"] = best_val;
  report.final_metrics["train_accuracy"] = accuracy(logits, labels, data.train);
  report.final_metrics["test_accuracy"] = accuracy(logits, labels, data.test);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(report), std::move(model)};
}

TrainReport run_training(const RunConfig& config, std::uint64_t seed) {
  config.validate();
  RunConfig snapshot = config;
  snapshot.seed = seed;
  snapshot.repeats = 1;
  const AdamOptions adam{config.lr, config.beta1, config.beta2, config.eps, config.weight_decay};

  if (config.task == TaskKind::kRegression) {
    MoleculeDataset dataset = parse_molecule_file(config.dataset);
    if (config.max_records > 0 && static_cast<int>(dataset.records.size()) > config.max_records) {
      dataset.records.resize(config.max_records);
    }
    RegressionOptions options;
    options.model = config.model;
    options.featurizer.vocabulary = dataset.vocabulary;
    options.featurizer.ring_flags = config.ring_flags;
    options.adam = adam;
    options.epochs = config.epochs;
    options.batch_size = config.batch_size;
    options.patience = config.patience;
    std::copy(config.split.begin(), config.split.end(), options.split.begin());
    options.standardize_targets = config.standardize_targets;
    options.seed = seed;
    RegressionResult result = train_regression(dataset, options);
    result.report.config = snapshot.to_json();
    if (!config.checkpoint.empty()) {
      json meta;
      meta["config"] = snapshot.to_json();
      meta["vocabulary"] = dataset.vocabulary;
      meta["scaler"] = result.scaler.to_json();
      meta["node_width"] = result.model.node_feature_width();
      meta["edge_width"] = result.model.edge_feature_width();
      meta["num_targets"] = result.model.config().num_targets;
      save_checkpoint(config.checkpoint, result.model.parameters(), meta.dump());
    }
    return result.report;
  }

  CitationGraph data = parse_citation_files(config.content_file, config.cites_file);
  assign_splits(data, config.train_per_class, config.val_size, config.test_size, seed);
  NodeClassificationOptions options;
  options.gcn = config.gcn;
  options.plain_gcn = config.gcn_model == "gcn";
  options.adam = adam;
  options.epochs = config.epochs;
  options.patience = config.patience;
  options.seed = seed;
  NodeClassificationResult result = train_node_classification(data, options);
  result.report.config = snapshot.to_json();
  if (!config.checkpoint.empty()) {
    json meta;
    meta["config"] = snapshot.to_json();
    meta["num_features"] = data.graph.node_feature_width();
    meta["class_names"] = data.class_names;
    save_checkpoint(config.checkpoint, result.model.parameters(), meta.dump());
  }
  return result.report;
}

}  // namespace pmpnn
