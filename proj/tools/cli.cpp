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

#include "pathmpnn/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pathmpnn/chem.hpp"
#include "pathmpnn/error.hpp"
#include "pathmpnn/geometry.hpp"
#include "pathmpnn/gradcheck.hpp"
#include "pathmpnn/io.hpp"
#include "pathmpnn/paths.hpp"
#include "pathmpnn/synth.hpp"
#include "pathmpnn/training.hpp"

namespace pmpnn {

using nlohmann::json;

namespace {

struct PathsArgs {
  std::string input;
  int record = 0;
  int node = 0;
  int length = 1;
  int sample = 0;
  std::uint64_t seed = 0;
};

struct FeaturizeArgs {
  std::string input;
  std::string mode;
  int length = 1;
  std::string out;
  bool explicit_hydrogens = false;
};

struct GradcheckArgs {
  std::string op;
  bool full_model = false;
  std::uint64_t seed = 7;
};

struct TrainArgs {
  std::string config;
  std::string report;
  int repeats = 0;
  std::optional<std::uint64_t> seed;
};

struct EvalArgs {
  std::string checkpoint;
  std::string input;
  std::string cites;
};

struct SynthArgs {
  std::string task;
  int n = 200;
  std::uint64_t seed = 0;
  std::string out;
};

Graph load_molecule_graph(const std::string& input, int index, bool explicit_hydrogens,
                          MoleculeRecord* record_out = nullptr) {
  const MoleculeDataset dataset = parse_molecule_file(input);
  if (index < 0 || index >= static_cast<int>(dataset.records.size())) {
    throw ValidationError("record index " + std::to_string(index) + " out of range (file has " +
                          std::to_string(dataset.records.size()) + " records)");
  }
  FeaturizerConfig config;
  config.vocabulary = dataset.vocabulary;
  config.explicit_hydrogens = explicit_hydrogens;
  if (record_out != nullptr) *record_out = dataset.records[index];
  return build_graph(dataset.records[index], config);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  return out;
}

void run_paths(const PathsArgs& a, std::ostream& out) {
  const Graph g = load_molecule_graph(a.input, a.record, false);
  if (a.node < 0 || a.node >= g.num_nodes()) {
    throw ValidationError("node " + std::to_string(a.node) + " out of range (graph has " +
                          std::to_string(g.num_nodes()) + " nodes)");
  }
  if (a.length < 1) throw ValidationError("--length must be >= 1");
  const std::vector<Path> paths = a.sample > 0 ? sample_paths(g, a.node, a.length, a.sample, a.seed)
                                               : enumerate_paths(g, a.node, a.length);
  for (const Path& p : paths) {
    for (std::size_t i = 0; i < p.nodes.size(); ++i) out << (i ? " " : "") << p.nodes[i];
    out << '\n';
  }
}

void run_featurize(const FeaturizeArgs& a, std::ostream& out) {
  const FeatureMode mode = parse_feature_mode(a.mode);
  if (mode == FeatureMode::kBase) throw ValidationError("--mode must be substructure or geometry");
  if (a.length < 1 || a.length > 3) throw ValidationError("--length must be 1, 2 or 3");
  const MoleculeDataset dataset = parse_molecule_file(a.input);
  FeaturizerConfig config;
  config.vocabulary = dataset.vocabulary;
  config.explicit_hydrogens = a.explicit_hydrogens;
  std::ofstream file = open_output(a.out);
  std::size_t rows = 0;
  for (const auto& record : dataset.records) {
    const Graph g = build_graph(record, config);
    if (mode == FeatureMode::kGeometry && !g.has_coords()) {
      throw ValidationError("molecule '" + record.id + "' has no coordinates for geometry mode");
    }
    std::optional<SubstructureIndex> index;
    if (mode == FeatureMode::kSubstructure) {
      index.emplace(g, a.explicit_hydrogens ? HydrogenMode::kExplicit : HydrogenMode::kHeavyAtom);
    }
    for (int v = 0; v < g.num_nodes(); ++v) {
      for (const Path& p : enumerate_paths(g, v, a.length)) {
        json j;
        j["molecule"] = record.id;
        j["root"] = v;
        j["path"] = p.nodes;
        j["features"] = mode == FeatureMode::kGeometry
                            ? geometry_path_features(g, p).flatten()
                            : substructure_path_features(*index, p).flatten();
        file << j.dump() << '\n';
        ++rows;
      }
    }
  }
  if (!file) throw NumericError("write failed for '" + a.out + "'");
  out << "wrote " << rows << " paths from " << dataset.records.size() << " molecules to " << a.out
      << '\n';
}

bool run_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  std::vector<GradcheckResult> results;
  if (!a.op.empty()) {
    results.push_back(gradcheck_op(a.op, a.seed));
  } else if (a.full_model) {
    results = gradcheck_full_model(a.seed);
  } else {
    results = gradcheck_all_ops(a.seed);
  }
  bool ok = true;
  out << std::left << std::setw(26) << "check" << std::setw(9) << "entries" << std::setw(14)
      << "max_rel_err" << "status\n";
  for (const auto& r : results) {
    std::ostringstream err;
    err << std::scientific << std::setprecision(3) << r.max_relative_error;
    out << std::left << std::setw(26) << r.name << std::setw(9) << r.entries << std::setw(14)
        << err.str() << (r.passed ? "pass" : "FAIL") << '\n';
    ok = ok && r.passed;
  }
  return ok;
}

void run_train(const TrainArgs& a, std::ostream& out) {
  RunConfig config = RunConfig::load(a.config);
  if (a.repeats > 0) config.repeats = a.repeats;
  if (a.seed) config.seed = *a.seed;
  config.validate();
  std::ofstream report = open_output(a.report);
  std::vector<TrainReport> reports;
  for (int r = 0; r < config.repeats; ++r) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(r);
    reports.push_back(run_training(config, seed));
    report << reports.back().to_jsonl();
    report.flush();
    json line = {{"seed", seed}, {"best_epoch", reports.back().best_epoch},
                 {"metrics", reports.back().final_metrics}};
    out << line.dump() << '\n';
  }
  if (config.repeats > 1) {
    const json summary = summary_json(reports);
    report << summary.dump() << '\n';
    for (const auto& [name, s] : summary["summary"]["metrics"].items()) {
      out << name << ": " << s["mean"].get<double>() << " +/- " << s["std"].get<double>() << '\n';
    }
  }
  if (!report) throw NumericError("write failed for '" + a.report + "'");
}

void run_eval(const EvalArgs& a, std::ostream& out) {
  const Checkpoint checkpoint = load_checkpoint(a.checkpoint);
  json meta;
  try {
    meta = json::parse(checkpoint.meta);
  } catch (const json::parse_error& e) {
    throw ValidationError("checkpoint metadata is not valid JSON: " + std::string(e.what()));
  }
  const RunConfig config = RunConfig::from_json(meta.at("config"));
  json result;
  if (config.task == TaskKind::kRegression) {
    const MoleculeDataset dataset = parse_molecule_file(a.input);
    FeaturizerConfig featurizer;
    featurizer.vocabulary = meta.at("vocabulary").get<std::vector<std::string>>();
    featurizer.ring_flags = config.ring_flags;
    featurizer.explicit_hydrogens = config.model.explicit_hydrogens;
    ModelConfig model_config = config.model;
    model_config.num_targets = meta.at("num_targets").get<int>();
    PathMpnn model(model_config, meta.at("node_width").get<int>(), meta.at("edge_width").get<int>());
    restore_parameters(model.parameters(), checkpoint);
    const TargetScaler scaler = TargetScaler::from_json(meta.at("scaler"));
    const auto predictions = predict_regression(model, featurizer, scaler, dataset.records);
    std::vector<double> pred;
    std::vector<double> target;
    for (std::size_t r = 0; r < dataset.records.size(); ++r) {
      if (dataset.records[r].targets.size() != predictions[r].size()) {
        throw ValidationError("record '" + dataset.records[r].id + "' has " +
                              std::to_string(dataset.records[r].targets.size()) +
                              " targets, model predicts " + std::to_string(predictions[r].size()));
      }
      pred.insert(pred.end(), predictions[r].begin(), predictions[r].end());
      target.insert(target.end(), dataset.records[r].targets.begin(),
                    dataset.records[r].targets.end());
    }
    result["records"] = dataset.records.size();
    result["mae"] = mae_metric(pred, target);
    result["rmse"] = rmse_metric(pred, target);
    result["percent_error"] = percent_error_metric(pred, target);
  } else {
    if (a.cites.empty()) throw ValidationError("eval of a citation checkpoint needs --cites");
    CitationGraph data = parse_citation_files(a.input, a.cites);
    assign_splits(data, config.train_per_class, config.val_size, config.test_size, config.seed);
    PathGcnConfig gcn = config.gcn;
    if (config.gcn_model == "gcn") gcn.per_hop = 0;
    PathGcn model(gcn, data.graph.node_feature_width(), data.num_classes());
    restore_parameters(model.parameters(), checkpoint);
    const Tensor features = citation_features(data);
    const NormalizedAdjacency adjacency = normalize_adjacency(data.graph);
    const Tensor logits = model.predict(features, data.graph, adjacency, eval_sample_seed(config.seed));
    result["nodes"] = data.num_nodes();
    result["test_accuracy"] = accuracy(logits, data.graph.labels(), data.test);
    result["val_accuracy"] = accuracy(logits, data.graph.labels(), data.val);
  }
  out << result.dump() << '\n';
}

void run_synth(const SynthArgs& a, std::ostream& out) {
  if (a.n < 1) throw ValidationError("--n must be >= 1");
  const MoleculeDataset dataset = generate_synthetic(parse_synth_task(a.task), a.n, a.seed);
  write_molecule_file(a.out, dataset);
  out << "wrote " << dataset.records.size() << " molecules to " << a.out << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Path-based message passing toolkit", "pathmpnn"};
  app.require_subcommand(1);

  PathsArgs paths_args;
  auto* paths = app.add_subcommand("paths", "List simple paths rooted at a node");
  paths->add_option("--input", paths_args.input, "Molecule file")->required();
  paths->add_option("--record", paths_args.record, "Molecule index in the file");
  paths->add_option("--node", paths_args.node, "Root node")->required();
  paths->add_option("--length", paths_args.length, "Maximum path length")->required();
  paths->add_option("--sample", paths_args.sample, "Sample at most K paths instead of enumerating");
  paths->add_option("--seed", paths_args.seed, "Sampling seed");

  FeaturizeArgs featurize_args;
  auto* featurize = app.add_subcommand("featurize", "Dump per-path features");
  featurize->add_option("--input", featurize_args.input, "Molecule file")->required();
  featurize->add_option("--mode", featurize_args.mode, "substructure or geometry")->required();
  featurize->add_option("--length", featurize_args.length, "Maximum path length")->required();
  featurize->add_option("--out", featurize_args.out, "Output file")->required();
  featurize->add_flag("--explicit-hydrogens", featurize_args.explicit_hydrogens,
                      "Keep hydrogens as graph nodes");

  GradcheckArgs gradcheck_args;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  auto* op = gradcheck->add_option("--op", gradcheck_args.op, "Single op to check");
  gradcheck->add_flag("--full-model", gradcheck_args.full_model,
                      "Check the whole model in every feature mode")
      ->excludes(op);
  gradcheck->add_option("--seed", gradcheck_args.seed, "Seed for random inputs");
  gradcheck->add_flag_callback("--list", [&out] {
    for (const auto& name : gradcheck_op_names()) out << name << '\n';
    throw CLI::Success();
  }, "List op names");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train a model from a run config");
  train->add_option("--config", train_args.config, "Run config (JSON)")->required();
  train->add_option("--report", train_args.report, "Report output file")->required();
  train->add_option("--repeats", train_args.repeats, "Runs with seeds seed, seed+1, ...");
  train->add_option("--seed", train_args.seed, "Override the config seed");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint file")->required();
  eval->add_option("--input", eval_args.input, "Molecule file or citation content file")
      ->required();
  eval->add_option("--cites", eval_args.cites, "Citation links file");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--task", synth_args.task, "alcohol-count or dihedral-sum")->required();
  synth->add_option("--n", synth_args.n, "Number of molecules");
  synth->add_option("--seed", synth_args.seed, "Generator seed");
  synth->add_option("--out", synth_args.out, "Output file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (paths->parsed()) run_paths(paths_args, out);
    if (featurize->parsed()) run_featurize(featurize_args, out);
    if (gradcheck->parsed() && !run_gradcheck(gradcheck_args, out)) {
      err << "error: gradient check failed\n";
      return kExitNumeric;
    }
    if (train->parsed()) run_train(train_args, out);
    if (eval->parsed()) run_eval(eval_args, out);
    if (synth->parsed()) run_synth(synth_args, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace pmpnn
