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

#include "pathmpnn/io.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "pathmpnn/error.hpp"

namespace pmpnn {

using nlohmann::json;

namespace {

[[noreturn]] void fail_line(int line_number, const std::string& message) {
  throw ValidationError("line " + std::to_string(line_number) + ": " + message);
}

bool skippable(std::string_view line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string_view::npos || line[first] == '#';
}

std::vector<std::string> string_list(const json& j, const char* field, int line_number) {
  if (!j.is_array()) fail_line(line_number, std::string("field '") + field + "' must be a list");
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) {
      fail_line(line_number, std::string("field '") + field + "' must hold strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

double real(const json& j, const char* field, int line_number) {
  if (!j.is_number()) fail_line(line_number, std::string("field '") + field + "' must be numeric");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail_line(line_number, std::string("field '") + field + "' is not finite");
  return x;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

MoleculeRecord parse_molecule_line(std::string_view line, int line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    fail_line(line_number, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) fail_line(line_number, "expected an object");
  static const std::set<std::string> known = {"id", "elements", "coords", "bonds", "targets"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) fail_line(line_number, "unknown field '" + key + "'");
  }
  for (const char* required : {"id", "elements", "bonds"}) {
    if (!j.contains(required)) fail_line(line_number, std::string("missing field '") + required + "'");
  }

  MoleculeRecord record;
  if (!j["id"].is_string()) fail_line(line_number, "field 'id' must be a string");
  record.id = j["id"].get<std::string>();
  for (auto& element : string_list(j["elements"], "elements", line_number)) {
    record.atoms.push_back({std::move(element), std::nullopt});
  }

  if (j.contains("coords")) {
    const json& coords = j["coords"];
    if (!coords.is_array() || coords.size() != record.atoms.size()) {
      fail_line(line_number, "field 'coords' must list one [x, y, z] per atom");
    }
    for (std::size_t a = 0; a < coords.size(); ++a) {
      if (!coords[a].is_array() || coords[a].size() != 3) {
        fail_line(line_number, "field 'coords' entry " + std::to_string(a) + " is not [x, y, z]");
      }
      record.atoms[a].coords = Vec3{real(coords[a][0], "coords", line_number),
                                    real(coords[a][1], "coords", line_number),
                                    real(coords[a][2], "coords", line_number)};
    }
  }

  if (!j["bonds"].is_array()) fail_line(line_number, "field 'bonds' must be a list");
  for (const auto& bond : j["bonds"]) {
    if (!bond.is_array() || bond.size() != 3 || !bond[0].is_number_integer() ||
        !bond[1].is_number_integer() || !bond[2].is_string()) {
      fail_line(line_number, "field 'bonds' entries must be [i, j, order]");
    }
    Bond b;
    b.i = bond[0].get<int>();
    b.j = bond[1].get<int>();
    try {
      b.order = parse_bond_order(bond[2].get<std::string>());
    } catch (const ValidationError& e) {
      fail_line(line_number, std::string("field 'bonds': ") + e.what());
    }
    record.bonds.push_back(b);
  }

  if (j.contains("targets")) {
    if (!j["targets"].is_array()) fail_line(line_number, "field 'targets' must be a list");
    for (const auto& t : j["targets"]) record.targets.push_back(real(t, "targets", line_number));
  }

  try {
    record.validate();
  } catch (const ValidationError& e) {
    fail_line(line_number, e.what());
  }
  return record;
}

std::string format_molecule_line(const MoleculeRecord& record) {
  json j;
  j["id"] = record.id;
  json elements = json::array();
  for (const auto& atom : record.atoms) elements.push_back(atom.element);
  j["elements"] = elements;
  if (record.has_coords()) {
    json coords = json::array();
    for (const auto& atom : record.atoms) coords.push_back(*atom.coords);
    j["coords"] = coords;
  }
  json bonds = json::array();
  for (const auto& b : record.bonds) bonds.push_back({b.i, b.j, std::string(to_string(b.order))});
  j["bonds"] = bonds;
  j["targets"] = record.targets;
  return j.dump();
}

MoleculeDataset parse_molecules(std::istream& in) {
  MoleculeDataset out;
  bool have_header = false;
  bool seen_record = false;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (skippable(line)) continue;
    if (!seen_record && !have_header && line.find("\"header\"") != std::string::npos) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        fail_line(line_number, std::string("malformed JSON: ") + e.what());
      }
      if (j.is_object() && j.contains("header")) {
        const json& h = j["header"];
        if (!h.is_object()) fail_line(line_number, "header must be an object");
        for (const auto& [key, value] : h.items()) {
          if (key != "elements" && key != "targets") {
            fail_line(line_number, "unknown header field '" + key + "'");
          }
        }
        if (h.contains("elements")) out.vocabulary = string_list(h["elements"], "elements", line_number);
        if (h.contains("targets")) out.target_names = string_list(h["targets"], "targets", line_number);
        have_header = true;
        continue;
      }
    }
    MoleculeRecord record = parse_molecule_line(line, line_number);
    if (!out.records.empty() && record.targets.size() != out.records.front().targets.size()) {
      fail_line(line_number, "target count differs from the first record");
    }
    if (!out.target_names.empty() && record.targets.size() != out.target_names.size()) {
      fail_line(line_number, "target count differs from the header");
    }
    out.records.push_back(std::move(record));
    seen_record = true;
  }
  if (in.bad()) throw ValidationError("read error after line " + std::to_string(line_number));
  if (out.vocabulary.empty()) {
    std::set<std::string> symbols;
    for (const auto& r : out.records) {
      for (const auto& a : r.atoms) symbols.insert(a.element);
    }
    out.vocabulary.assign(symbols.begin(), symbols.end());
  }
  return out;
}

MoleculeDataset parse_molecule_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  try {
    return parse_molecules(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_molecule_file(const std::filesystem::path& path, const MoleculeDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  json header;
  header["header"]["elements"] = dataset.vocabulary;
  if (!dataset.target_names.empty()) header["header"]["targets"] = dataset.target_names;
  out << header.dump() << '\n';
  for (const auto& record : dataset.records) out << format_molecule_line(record) << '\n';
  if (!out) throw NumericError("write failed for '" + path.string() + "'");
}

CitationGraph parse_citation(std::istream& content, std::istream& cites) {
  CitationGraph data;
  std::unordered_map<std::string, int> node_index;
  std::unordered_map<std::string, int> class_index;
  std::vector<double> features;
  std::vector<int> labels;
  int width = -1;
  std::string line;
  int line_number = 0;
  while (std::getline(content, line)) {
    ++line_number;
    if (skippable(line)) continue;
    std::istringstream tokens(line);
    std::vector<std::string> fields;
    for (std::string t; tokens >> t;) fields.push_back(std::move(t));
    if (fields.size() < 2) fail_line(line_number, "content line needs an id and a label");
    const int f = static_cast<int>(fields.size()) - 2;
    if (width < 0) width = f;
    if (f != width) {
      fail_line(line_number, "expected " + std::to_string(width) + " features, got " + std::to_string(f));
    }
    if (!node_index.emplace(fields.front(), static_cast<int>(data.node_ids.size())).second) {
      fail_line(line_number, "duplicate node id '" + fields.front() + "'");
    }
    data.node_ids.push_back(fields.front());
    for (int k = 1; k <= f; ++k) {
      if (fields[k] == "0") {
        features.push_back(0.0);
      } else if (fields[k] == "1") {
        features.push_back(1.0);
      } else {
        fail_line(line_number, "feature " + std::to_string(k) + " is not 0 or 1");
      }
    }
    const auto [it, inserted] =
        class_index.emplace(fields.back(), static_cast<int>(data.class_names.size()));
    if (inserted) data.class_names.push_back(fields.back());
    labels.push_back(it->second);
  }

  std::set<std::pair<int, int>> edges;
  line_number = 0;
  while (std::getline(cites, line)) {
    ++line_number;
    if (skippable(line)) continue;
    std::istringstream tokens(line);
    std::string a, b, extra;
    if (!(tokens >> a >> b) || (tokens >> extra)) fail_line(line_number, "cites line needs two ids");
    const auto ia = node_index.find(a);
    const auto ib = node_index.find(b);
    if (ia == node_index.end() || ib == node_index.end() || ia->second == ib->second) {
      ++data.dropped_citations;
      continue;
    }
    const auto key = std::minmax(ia->second, ib->second);
    if (!edges.insert(key).second) ++data.duplicate_citations;
  }

  const int n = static_cast<int>(data.node_ids.size());
  data.graph = Graph(n, std::vector<std::pair<int, int>>(edges.begin(), edges.end()));
  data.graph.set_node_features(std::max(width, 0), std::move(features));
  data.graph.set_labels(std::move(labels));
  data.validate();
  return data;
}

CitationGraph parse_citation_files(const std::filesystem::path& content,
                                   const std::filesystem::path& cites) {
  std::ifstream content_in = open_input(content);
  std::ifstream cites_in = open_input(cites);
  return parse_citation(content_in, cites_in);
}

std::string_view to_string(TaskKind task) {
  return task == TaskKind::kRegression ? "regression" : "node-classification";
}

RunConfig RunConfig::defaults_for(TaskKind task) {
  RunConfig c;
  c.task = task;
  if (task == TaskKind::kNodeClassification) {
    c.lr = 0.01;
    c.weight_decay = 5e-4;
    c.epochs = 200;
    c.patience = 200;
  }
  return c;
}

void RunConfig::validate() const {
  if (task == TaskKind::kRegression) {
    if (dataset.empty()) throw ValidationError("config: 'dataset' is required for regression");
    model.validate();
    if (batch_size < 1) throw ValidationError("config: 'batch_size' must be >= 1");
    if (split.size() != 3) throw ValidationError("config: 'split' needs three fractions");
    double total = 0.0;
    for (double f : split) {
      if (f < 0.0) throw ValidationError("config: split fractions must be non-negative");
      total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("config: split fractions must sum to 1");
    if (max_records < 0) throw ValidationError("config: 'max_records' must be >= 0");
  } else {
    if (content_file.empty() || cites_file.empty()) {
      throw ValidationError("config: 'content_file' and 'cites_file' are required");
    }
    if (gcn_model != "gcn" && gcn_model != "path-gcn") {
      throw ValidationError("config: 'gcn_model' must be 'gcn' or 'path-gcn'");
    }
    gcn.validate();
    if (train_per_class < 1 || val_size < 0 || test_size < 1) {
      throw ValidationError("config: split sizes must be positive");
    }
  }
  if (!(lr > 0.0)) throw ValidationError("config: 'lr' must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ValidationError("config: betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ValidationError("config: 'eps' must be positive");
  if (weight_decay < 0.0) throw ValidationError("config: 'weight_decay' must be >= 0");
  if (epochs < 1) throw ValidationError("config: 'epochs' must be >= 1");
  if (patience < 1) throw ValidationError("config: 'patience' must be >= 1");
  if (repeats < 1) throw ValidationError("config: 'repeats' must be >= 1");
}

json RunConfig::to_json() const {
  json j;
  j["task"] = std::string(to_string(task));
  if (task == TaskKind::kRegression) {
    j["dataset"] = dataset;
    j["hidden_dim"] = model.hidden_dim;
    j["steps"] = model.steps;
    j["max_path_length"] = model.max_path_length;
    j["feature_mode"] = std::string(to_string(model.mode));
    j["set2set_steps"] = model.set2set_steps;
    j["attention_heads"] = model.attention_heads;
    j["exact_length_only"] = model.exact_length_only;
    j["per_length_attention"] = model.per_length_attention;
    j["path_budget"] = model.path_budget;
    j["leaky_slope"] = model.leaky_slope;
    j["explicit_hydrogens"] = model.explicit_hydrogens;
    j["ring_flags"] = ring_flags;
    j["max_records"] = max_records;
    j["batch_size"] = batch_size;
    j["split"] = split;
    j["standardize_targets"] = standardize_targets;
  } else {
    j["content_file"] = content_file;
    j["cites_file"] = cites_file;
    j["gcn_model"] = gcn_model;
    j["hidden_dim"] = gcn.hidden_dim;
    j["max_path_length"] = gcn.max_path_length;
    j["per_hop"] = gcn.per_hop;
    j["dropout"] = gcn.dropout;
    j["resample_each_epoch"] = gcn.resample_each_epoch;
    j["eval_samples"] = gcn.eval_samples;
    j["train_per_class"] = train_per_class;
    j["val_size"] = val_size;
    j["test_size"] = test_size;
  }
  j["lr"] = lr;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["eps"] = eps;
  j["weight_decay"] = weight_decay;
  j["epochs"] = epochs;
  j["patience"] = patience;
  j["seed"] = seed;
  j["repeats"] = repeats;
  if (!checkpoint.empty()) j["checkpoint"] = checkpoint;
  return j;
}

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  TaskKind task = TaskKind::kRegression;
  if (j.contains("task")) {
    if (!j["task"].is_string()) throw ValidationError("config: 'task' must be a string");
    const std::string t = j["task"].get<std::string>();
    if (t == "regression") {
      task = TaskKind::kRegression;
    } else if (t == "node-classification") {
      task = TaskKind::kNodeClassification;
    } else {
      throw ValidationError("config: unknown task '" + t + "'");
    }
  }
  RunConfig c = defaults_for(task);
  const bool regression = task == TaskKind::kRegression;

  auto resolve = [&](const std::string& p) {
    if (p.empty() || base_dir.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (base_dir / p).lexically_normal().string();
  };

  std::map<std::string, std::function<void(const json&)>> setters;
  auto integer = [](const std::string& key, int& slot) {
    return [key, &slot](const json& v) {
      if (!v.is_number_integer()) throw ValidationError("config: '" + key + "' must be an integer");
      slot = v.get<int>();
    };
  };
  auto number = [](const std::string& key, double& slot) {
    return [key, &slot](const json& v) {
      if (!v.is_number()) throw ValidationError("config: '" + key + "' must be a number");
      slot = v.get<double>();
    };
  };
  auto boolean = [](const std::string& key, bool& slot) {
    return [key, &slot](const json& v) {
      if (!v.is_boolean()) throw ValidationError("config: '" + key + "' must be true or false");
      slot = v.get<bool>();
    };
  };
  auto text = [&](const std::string& key, std::string& slot, bool is_path) {
    return [key, &slot, is_path, &resolve](const json& v) {
      if (!v.is_string()) throw ValidationError("config: '" + key + "' must be a string");
      slot = is_path ? resolve(v.get<std::string>()) : v.get<std::string>();
    };
  };

  setters["task"] = [](const json&) {};
  setters["lr"] = number("lr", c.lr);
  setters["beta1"] = number("beta1", c.beta1);
  setters["beta2"] = number("beta2", c.beta2);
  setters["eps"] = number("eps", c.eps);
  setters["weight_decay"] = number("weight_decay", c.weight_decay);
  setters["epochs"] = integer("epochs", c.epochs);
  setters["patience"] = integer("patience", c.patience);
  setters["repeats"] = integer("repeats", c.repeats);
  setters["checkpoint"] = text("checkpoint", c.checkpoint, true);
  setters["seed"] = [&c](const json& v) {
    if (!v.is_number_unsigned()) throw ValidationError("config: 'seed' must be a non-negative integer");
    c.seed = v.get<std::uint64_t>();
  };
  if (regression) {
    setters["dataset"] = text("dataset", c.dataset, true);
    setters["hidden_dim"] = integer("hidden_dim", c.model.hidden_dim);
    setters["steps"] = integer("steps", c.model.steps);
    setters["max_path_length"] = integer("max_path_length", c.model.max_path_length);
    setters["feature_mode"] = [&c](const json& v) {
      if (!v.is_string()) throw ValidationError("config: 'feature_mode' must be a string");
      c.model.mode = parse_feature_mode(v.get<std::string>());
    };
    setters["set2set_steps"] = integer("set2set_steps", c.model.set2set_steps);
    setters["attention_heads"] = integer("attention_heads", c.model.attention_heads);
    setters["exact_length_only"] = boolean("exact_length_only", c.model.exact_length_only);
    setters["per_length_attention"] = boolean("per_length_attention", c.model.per_length_attention);
    setters["path_budget"] = integer("path_budget", c.model.path_budget);
    setters["leaky_slope"] = number("leaky_slope", c.model.leaky_slope);
    setters["explicit_hydrogens"] = boolean("explicit_hydrogens", c.model.explicit_hydrogens);
    setters["ring_flags"] = boolean("ring_flags", c.ring_flags);
    setters["max_records"] = integer("max_records", c.max_records);
    setters["batch_size"] = integer("batch_size", c.batch_size);
    setters["standardize_targets"] = boolean("standardize_targets", c.standardize_targets);
    setters["split"] = [&c](const json& v) {
      if (!v.is_array()) throw ValidationError("config: 'split' must be a list of three fractions");
      c.split.clear();
      for (const auto& f : v) {
        if (!f.is_number()) throw ValidationError("config: 'split' must hold numbers");
        c.split.push_back(f.get<double>());
      }
    };
  } else {
    setters["content_file"] = text("content_file", c.content_file, true);
    setters["cites_file"] = text("cites_file", c.cites_file, true);
    setters["gcn_model"] = text("gcn_model", c.gcn_model, false);
    setters["hidden_dim"] = integer("hidden_dim", c.gcn.hidden_dim);
    setters["max_path_length"] = integer("max_path_length", c.gcn.max_path_length);
    setters["per_hop"] = integer("per_hop", c.gcn.per_hop);
    setters["dropout"] = number("dropout", c.gcn.dropout);
    setters["resample_each_epoch"] = boolean("resample_each_epoch", c.gcn.resample_each_epoch);
    setters["eval_samples"] = integer("eval_samples", c.gcn.eval_samples);
    setters["train_per_class"] = integer("train_per_class", c.train_per_class);
    setters["val_size"] = integer("val_size", c.val_size);
    setters["test_size"] = integer("test_size", c.test_size);
  }

  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ValidationError("config: unknown key '" + key + "' for task " +
                            std::string(to_string(task)));
    }
    it->second(value);
  }
  c.model.seed = c.seed;
  c.gcn.seed = c.seed;
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": malformed JSON: " + e.what());
  }
  return from_json(j, path.parent_path());
}

}  // namespace pmpnn
