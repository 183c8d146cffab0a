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

#ifndef PATHMPNN_IO_HPP_
#define PATHMPNN_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pathmpnn/citation.hpp"
#include "pathmpnn/graph.hpp"
#include "pathmpnn/model.hpp"

namespace pmpnn {

// Molecule files hold one JSON object per line (see docs/formats.md):
//   {"header": {"elements": [...], "targets": [...]}}          optional, first
//   {"id": "...", "elements": [...], "coords": [[x, y, z], ...],
//    "bonds": [[i, j, "single"], ...], "targets": [...]}         one per molecule
// Blank lines and lines starting with '#' are skipped.
struct MoleculeDataset {
  // Element vocabulary for the atom one-hot. Taken from the header; without a
  // header it is the sorted set of symbols present in the file.
  std::vector<std::string> vocabulary;
  std::vector<std::string> target_names;
  std::vector<MoleculeRecord> records;
};

// Throws ValidationError("line N: ...") on the first malformed line.
MoleculeRecord parse_molecule_line(std::string_view line, int line_number);
std::string format_molecule_line(const MoleculeRecord& record);

MoleculeDataset parse_molecules(std::istream& in);
MoleculeDataset parse_molecule_file(const std::filesystem::path& path);
void write_molecule_file(const std::filesystem::path& path, const MoleculeDataset& dataset);

// Classic citation layout: content lines "<id> <f_1> ... <f_F> <label>" and
// cites lines "<cited> <citing>". Ids and class names are numbered by first
// appearance. Citations naming unknown ids are dropped and counted, as are
// duplicates in either direction; self citations are dropped.
CitationGraph parse_citation_files(const std::filesystem::path& content,
                                   const std::filesystem::path& cites);
CitationGraph parse_citation(std::istream& content, std::istream& cites);

enum class TaskKind { kRegression, kNodeClassification };

// Every knob of a `train` run. Loaded from a flat JSON object; unknown keys
// are rejected.
struct RunConfig {
  TaskKind task = TaskKind::kRegression;
  std::string dataset;
  std::string content_file;
  std::string cites_file;

  // Molecular model.
  ModelConfig model;
  bool ring_flags = false;
  int max_records = 0;  // 0 keeps every record

  // Citation model.
  std::string gcn_model = "path-gcn";  // or "gcn"
  PathGcnConfig gcn;
  int train_per_class = 20;
  int val_size = 500;
  int test_size = 1000;

  // Optimisation.
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  int epochs = 300;
  int batch_size = 16;
  int patience = 25;
  std::vector<double> split = {0.8, 0.1, 0.1};
  bool standardize_targets = true;

  std::uint64_t seed = 0;
  int repeats = 1;
  std::string checkpoint;

  // Defaults tuned per task: node classification uses lr 0.01, weight decay
  // 5e-4, 200 epochs.
  static RunConfig defaults_for(TaskKind task);

  void validate() const;
  nlohmann::json to_json() const;
  // Missing keys keep the task defaults. Relative paths are resolved against
  // `base_dir` when it is non-empty.
  static RunConfig from_json(const nlohmann::json& j,
                             const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
};

std::string_view to_string(TaskKind task);

}  // namespace pmpnn

#endif  // PATHMPNN_IO_HPP_
