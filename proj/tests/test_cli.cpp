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

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "pathmpnn/cli.hpp"
#include "pathmpnn/training.hpp"

using namespace pmpnn;
using nlohmann::json;

namespace {

const std::filesystem::path kSource = PATHMPNN_SOURCE_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch() {
  const auto dir = std::filesystem::temp_directory_path() / "pathmpnn_cli_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

// Two label groups joined by a bridge; features mostly follow the label.
void write_citation_fixture(const std::filesystem::path& dir) {
  std::ostringstream content, cites;
  std::mt19937_64 rng(1);
  std::bernoulli_distribution flip(0.15);
  for (int v = 0; v < 24; ++v) {
    content << "n" << v;
    for (int f = 0; f < 6; ++f) content << '\t' << (((f % 2) == (v % 2)) != flip(rng) ? 1 : 0);
    content << '\t' << (v % 2 ? "odd" : "even") << '\n';
    if (v >= 2) cites << "n" << v << "\tn" << v - 2 << '\n';
  }
  cites << "n0\tn1\n";
  write(dir / "toy.content", content.str());
  write(dir / "toy.cites", cites.str());
}

}  // namespace

TEST_CASE("paths on the chain fixture") {
  const Run r = cli({"paths", "--input", (kSource / "tests/fixtures/p4.jsonl").string(), "--node", "0",
                     "--length", "3"});
  CHECK(r.code == kExitOk);
  CHECK(r.out == "0 1\n0 1 2\n0 1 2 3\n");
  const Run sampled = cli({"paths", "--input", (kSource / "tests/fixtures/p4.jsonl").string(), "--node", "1",
                           "--length", "2", "--sample", "5", "--seed", "3"});
  CHECK(sampled.code == kExitOk);
  CHECK(sampled.out == "1 0\n1 2\n1 2 3\n");
}

TEST_CASE("usage errors exit with the validation code") {
  CHECK(cli({}).code == kExitValidation);
  CHECK(cli({"paths", "--node", "0"}).code == kExitValidation);
  const Run r = cli({"paths", "--input", "/nonexistent.jsonl", "--node", "0", "--length", "2"});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("/nonexistent.jsonl") != std::string::npos);
  CHECK(r.out.empty());
  CHECK(cli({"paths", "--input", (kSource / "tests/fixtures/p4.jsonl").string(), "--node", "9", "--length",
             "2"}).code == kExitValidation);
}

TEST_CASE("featurize writes one row per path") {
  const auto out = scratch() / "features.jsonl";
  const Run r = cli({"featurize", "--input", (kSource / "tests/fixtures/three.jsonl").string(), "--mode",
                     "substructure", "--length", "2", "--out", out.string()});
  REQUIRE(r.code == kExitOk);
  std::istringstream lines(slurp(out));
  std::string line;
  int rows = 0;
  bool hydroxyl_seen = false;
  while (std::getline(lines, line)) {
    const json j = json::parse(line);
    const auto path = j["path"].get<std::vector<int>>();
    CHECK(j["features"].size() == static_cast<std::size_t>(7 * (path.size() - 1) + 2));
    if (j["molecule"] == "ethanol" && path == std::vector<int>{0, 1, 2}) {
      hydroxyl_seen = true;
      CHECK(j["features"][14] == 1.0);
    }
    ++rows;
  }
  // heavy atoms only: water 0, ethanol 6, cyclohexanol 30
  CHECK(rows == 36);
  CHECK(hydroxyl_seen);
  // geometry mode needs coordinates on every molecule
  CHECK(cli({"featurize", "--input", (kSource / "tests/fixtures/three.jsonl").string(), "--mode", "geometry",
             "--length", "2", "--out", out.string()}).code == kExitValidation);
}

TEST_CASE("gradcheck commands") {
  const Run full = cli({"gradcheck", "--full-model"});
  CHECK(full.code == kExitOk);
  CHECK(full.out.find("FAIL") == std::string::npos);
  const Run one = cli({"gradcheck", "--op", "segment_softmax"});
  CHECK(one.code == kExitOk);
  CHECK(one.out.find("segment_softmax") != std::string::npos);
  CHECK(cli({"gradcheck", "--op", "bogus"}).code == kExitValidation);
  CHECK(cli({"gradcheck", "--list"}).out.find("lstm_cell") != std::string::npos);
}

TEST_CASE("synth, train, replay and eval") {
  const auto dir = scratch();
  const auto data = dir / "alcohol.jsonl";
  REQUIRE(cli({"synth", "--task", "alcohol-count", "--n", "40", "--seed", "3", "--out", data.string()}).code ==
          kExitOk);
  const Run twice = cli({"synth", "--task", "alcohol-count", "--n", "40", "--seed", "3", "--out",
                         (dir / "again.jsonl").string()});
  CHECK(slurp(data) == slurp(dir / "again.jsonl"));
  CHECK(cli({"synth", "--task", "nothing", "--n", "4", "--out", data.string()}).code == kExitValidation);

  const json config = {{"task", "regression"},   {"dataset", "alcohol.jsonl"}, {"feature_mode", "substructure"},
                       {"max_path_length", 2},   {"hidden_dim", 8},             {"steps", 2},
                       {"set2set_steps", 2},     {"epochs", 5},                 {"seed", 9},
                       {"checkpoint", "model.bin"}};
  write(dir / "run.json", config.dump());
  const Run trained = cli({"train", "--config", (dir / "run.json").string(), "--report",
                           (dir / "report.jsonl").string(), "--repeats", "2"});
  REQUIRE(trained.code == kExitOk);
  const auto reports = parse_reports(slurp(dir / "report.jsonl"));
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].seed == 9);
  CHECK(reports[1].seed == 10);
  CHECK(slurp(dir / "report.jsonl").find("{\"summary\"") != std::string::npos);

  // replay the embedded snapshot of the second run
  write(dir / "replay.json", reports[1].config.dump());
  REQUIRE(cli({"train", "--config", (dir / "replay.json").string(), "--report",
               (dir / "replay.jsonl").string()}).code == kExitOk);
  TrainReport original = reports[1];
  TrainReport replayed = TrainReport::from_jsonl(slurp(dir / "replay.jsonl"));
  original.wall_seconds = replayed.wall_seconds = 0;
  CHECK(replayed.to_jsonl() == original.to_jsonl());

  const Run evaluated = cli({"eval", "--checkpoint", (dir / "model.bin").string(), "--input", data.string()});
  REQUIRE(evaluated.code == kExitOk);
  const json metrics = json::parse(evaluated.out);
  CHECK(metrics["records"] == 40);
  CHECK(metrics["mae"].get<double>() >= 0.0);
}

TEST_CASE("train rejects bad configs") {
  const auto dir = scratch();
  write(dir / "missing.json", json{{"task", "regression"}, {"dataset", "nowhere.jsonl"}}.dump());
  const Run missing = cli({"train", "--config", (dir / "missing.json").string(), "--report",
                           (dir / "r.jsonl").string()});
  CHECK(missing.code == kExitValidation);
  CHECK(missing.err.find("nowhere.jsonl") != std::string::npos);
  write(dir / "unknown.json", json{{"task", "regression"}, {"dataset", "x"}, {"wings", 2}}.dump());
  CHECK(cli({"train", "--config", (dir / "unknown.json").string(), "--report", (dir / "r.jsonl").string()})
            .code == kExitValidation);
  write(dir / "broken.json", "{\"task\": ");
  CHECK(cli({"train", "--config", (dir / "broken.json").string(), "--report", (dir / "r.jsonl").string()})
            .code == kExitValidation);
}

TEST_CASE("citation train and eval agree") {
  const auto dir = scratch();
  write_citation_fixture(dir);
  const json config = {{"task", "node-classification"},
                       {"content_file", "toy.content"},
                       {"cites_file", "toy.cites"},
                       {"gcn_model", "path-gcn"},
                       {"train_per_class", 3},
                       {"val_size", 6},
                       {"test_size", 8},
                       {"epochs", 30},
                       {"seed", 4},
                       {"checkpoint", "gcn.bin"}};
  write(dir / "cite.json", config.dump());
  const Run trained = cli({"train", "--config", (dir / "cite.json").string(), "--report",
                           (dir / "cite.jsonl").string()});
  REQUIRE(trained.code == kExitOk);
  const TrainReport report = TrainReport::from_jsonl(slurp(dir / "cite.jsonl"));
  const Run evaluated = cli({"eval", "--checkpoint", (dir / "gcn.bin").string(), "--input",
                             (dir / "toy.content").string(), "--cites", (dir / "toy.cites").string()});
  REQUIRE(evaluated.code == kExitOk);
  const json metrics = json::parse(evaluated.out);
  CHECK(metrics["test_accuracy"].get<double>() == report.metric("test_accuracy"));
  CHECK(metrics["nodes"] == 24);
  CHECK(cli({"eval", "--checkpoint", (dir / "gcn.bin").string(), "--input", (dir / "toy.content").string()})
            .code == kExitValidation);
}
