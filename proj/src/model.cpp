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

#include "pathmpnn/model.hpp"

#include <optional>
#include <random>

#include "pathmpnn/chem.hpp"
#include "pathmpnn/error.hpp"
#include "pathmpnn/geometry.hpp"

namespace pmpnn {

std::string_view to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kBase:
      return "base";
    case FeatureMode::kSubstructure:
      return "substructure";
    case FeatureMode::kGeometry:
      return "geometry";
  }
  return "base";
}

FeatureMode parse_feature_mode(std::string_view text) {
  if (text == "base") return FeatureMode::kBase;
  if (text == "substructure") return FeatureMode::kSubstructure;
  if (text == "geometry") return FeatureMode::kGeometry;
  throw ValidationError("unknown feature mode '" + std::string(text) +
                        "' (expected base, substructure or geometry)");
}

void ModelConfig::validate() const {
  auto positive = [](int value, const char* name) {
    if (value < 1) {
      throw ValidationError(std::string(name) + " must be positive, got " +
                            std::to_string(value));
    }
  };
  positive(hidden_dim, "hidden_dim");
  positive(steps, "steps");
  positive(set2set_steps, "set2set_steps");
  positive(attention_heads, "attention_heads");
  positive(num_targets, "num_targets");
  if (max_path_length < 1 || max_path_length > 3) {
    throw ValidationError("max_path_length must be 1, 2 or 3, got " +
                          std::to_string(max_path_length));
  }
  if (path_budget < 0) throw ValidationError("path_budget must be >= 0");
}

Tensor Dense::apply(const Tensor& x) const { return add(matmul(x, weight), bias); }

int mode_feature_width(FeatureMode mode, int length) {
  switch (mode) {
    case FeatureMode::kBase:
      return 0;
    case FeatureMode::kSubstructure:
      return SubstructureFeatures::width(length);
    case FeatureMode::kGeometry:
      return GeometryFeatures::width(length);
  }
  return 0;
}

PreparedGraph prepare_graph(const Graph& graph, const ModelConfig& config) {
  config.validate();
  if (config.mode == FeatureMode::kGeometry && !graph.has_coords()) {
    throw ValidationError("geometry feature mode requires atomic coordinates");
  }
  const int max_len = config.max_path_length;
  const int edge_width = graph.edge_feature_width();

  std::optional<SubstructureIndex> substructure;
  if (config.mode == FeatureMode::kSubstructure) {
    substructure.emplace(graph, config.explicit_hydrogens ? HydrogenMode::kExplicit
                                                          : HydrogenMode::kHeavyAtom);
  }

  PreparedGraph out;
  out.num_nodes = graph.num_nodes();
  out.node_features = Tensor::constant({graph.num_nodes(), graph.node_feature_width()},
                                       graph.node_feature_matrix());
  out.blocks.resize(max_len);
  std::vector<std::vector<double>> rows(max_len);
  for (int k = 1; k <= max_len; ++k) {
    out.blocks[k - 1].length = k;
    out.blocks[k - 1].hops.resize(k);
  }

  EnumerationOptions options;
  options.exact_length_only = config.exact_length_only;
  std::mt19937_64 rng(config.seed);
  for (int v = 0; v < graph.num_nodes(); ++v) {
    const std::vector<Path> paths =
        config.path_budget > 0 ? sample_paths(graph, v, max_len, config.path_budget, rng)
                               : enumerate_paths(graph, v, max_len, options);
    for (const Path& path : paths) {
      const int k = path.length();
      if (config.exact_length_only && k != max_len) continue;
      PathFeatureBlock& block = out.blocks[k - 1];
      block.roots.push_back(v);
      for (int i = 0; i < k; ++i) block.hops[i].push_back(path.nodes[i + 1]);
      auto& row = rows[k - 1];
      for (int i = 0; i < k; ++i) {
        const auto e = graph.edge_features(path.nodes[i], path.nodes[i + 1]);
        row.insert(row.end(), e.begin(), e.end());
      }
      if (substructure) {
        const auto f = substructure_path_features(*substructure, path).flatten();
        row.insert(row.end(), f.begin(), f.end());
      } else if (config.mode == FeatureMode::kGeometry) {
        const auto f = geometry_path_features(graph, path).flatten();
        row.insert(row.end(), f.begin(), f.end());
      }
    }
  }
  for (int k = 1; k <= max_len; ++k) {
    PathFeatureBlock& block = out.blocks[k - 1];
    const int width = k * edge_width + mode_feature_width(config.mode, k);
    block.static_features =
        Tensor::constant({block.num_paths(), width}, std::move(rows[k - 1]));
  }
  return out;
}

Tensor message_standard(const Tensor& h_v, const Tensor& h_w, const Tensor& e_vw,
                        const Dense& layer) {
  return relu(layer.apply(concat({h_v, h_w, e_vw}, 1)));
}

Tensor message_path(const Tensor& h_root, const Tensor& path_block, const Dense& layer) {
  return relu(layer.apply(concat({h_root, path_block}, 1)));
}

Tensor attention_aggregate(const Tensor& node_states, const Tensor& messages,
                           std::span<const int> roots, std::span<const Tensor> heads,
                           double slope) {
  const int n = node_states.rows();
  if (messages.rows() == 0) return Tensor::zeros({n, messages.cols()});
  if (heads.empty()) throw ValidationError("attention_aggregate: no attention heads");
  const Tensor scored_input = concat({gather_rows(node_states, roots), messages}, 1);
  Tensor total;
  for (const Tensor& head : heads) {
    const Tensor scores = leaky_relu(matmul(scored_input, head), slope);
    const Tensor weights = segment_softmax(scores, roots, n);
    const Tensor m = segment_sum(mul(messages, weights), roots, n);
    total = total.defined() ? add(total, m) : m;
  }
  if (heads.size() > 1) total = scale(total, 1.0 / static_cast<double>(heads.size()));
  return total;
}

Tensor node_update(const Tensor& states, const Tensor& messages, const Dense& layer) {
  return sigmoid(layer.apply(concat({states, messages}, 1)));
}

Tensor set2set_readout(const Tensor& node_states, const Tensor& node_features,
                       const Set2SetParams& params, int steps) {
  if (steps < 1) throw ValidationError("set2set needs at least one step");
  const Tensor memory = params.memory.apply(concat({node_states, node_features}, 1));
  const int hidden = memory.cols();
  LstmState state{Tensor::zeros({1, hidden}), Tensor::zeros({1, hidden})};
  Tensor q_star = Tensor::zeros({1, 2 * hidden});
  for (int s = 0; s < steps; ++s) {
    state = lstm_cell(q_star, state, params.lstm_input_weights, params.lstm_hidden_weights,
                      params.lstm_bias);
    const Tensor scores = matmul(memory, transpose(state.h));  // [n, 1]
    const Tensor attention = softmax(scores, 0);
    const Tensor read = matmul(transpose(attention), memory);  // [1, hidden]
    q_star = concat({state.h, read}, 1);
  }
  return q_star;
}

PathMpnn::PathMpnn(ModelConfig config, int node_feature_width, int edge_feature_width)
    : config_(config), node_width_(node_feature_width), edge_width_(edge_feature_width) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  const int d = config_.hidden_dim;
  params_.add_weight("embed.W", node_width_, d, rng);
  params_.add_zeros("embed.b", {1, d});
  for (int k = 1; k <= config_.max_path_length; ++k) {
    const int width = d + k * d + k * edge_width_ + mode_feature_width(config_.mode, k);
    params_.add_weight("msg" + std::to_string(k) + ".W", width, d, rng);
    params_.add_zeros("msg" + std::to_string(k) + ".b", {1, d});
  }
  for (int h = 0; h < config_.attention_heads; ++h) {
    params_.add_weight("att" + std::to_string(h) + ".a", 2 * d, 1, rng);
  }
  params_.add_weight("update.W", 2 * d, d, rng);
  params_.add_zeros("update.b", {1, d});
  params_.add_weight("s2s.memory.W", d + node_width_, d, rng);
  params_.add_zeros("s2s.memory.b", {1, d});
  params_.add_weight("s2s.lstm.Wx", 2 * d, 4 * d, rng);
  params_.add_weight("s2s.lstm.Wh", d, 4 * d, rng);
  params_.add_zeros("s2s.lstm.b", {1, 4 * d});
  params_.add_weight("head.W", 2 * d, config_.num_targets, rng);
  params_.add_zeros("head.b", {1, config_.num_targets});
}

PreparedGraph PathMpnn::prepare(const Graph& graph) const {
  if (graph.node_feature_width() != node_width_ || graph.edge_feature_width() != edge_width_) {
    throw ShapeError("graph feature widths (" + std::to_string(graph.node_feature_width()) +
                     ", " + std::to_string(graph.edge_feature_width()) +
                     ") do not match the model (" + std::to_string(node_width_) + ", " +
                     std::to_string(edge_width_) + ")");
  }
  return prepare_graph(graph, config_);
}

Dense PathMpnn::message_layer(int length) const {
  const std::string prefix = "msg" + std::to_string(length);
  return {params_.get(prefix + ".W"), params_.get(prefix + ".b")};
}

std::vector<Tensor> PathMpnn::attention_heads() const {
  std::vector<Tensor> heads;
  for (int h = 0; h < config_.attention_heads; ++h) {
    heads.push_back(params_.get("att" + std::to_string(h) + ".a"));
  }
  return heads;
}

Dense PathMpnn::update_layer() const {
  return {params_.get("update.W"), params_.get("update.b")};
}

Set2SetParams PathMpnn::readout_params() const {
  return {{params_.get("s2s.memory.W"), params_.get("s2s.memory.b")},
          params_.get("s2s.lstm.Wx"),
          params_.get("s2s.lstm.Wh"),
          params_.get("s2s.lstm.b")};
}

Tensor PathMpnn::embed(const Tensor& node_features) const {
  return tanh(Dense{params_.get("embed.W"), params_.get("embed.b")}.apply(node_features));
}

Tensor PathMpnn::readout(const Tensor& states, const Tensor& node_features) const {
  const Tensor graph_vector =
      set2set_readout(states, node_features, readout_params(), config_.set2set_steps);
  return Dense{params_.get("head.W"), params_.get("head.b")}.apply(graph_vector);
}

Tensor PathMpnn::forward(const PreparedGraph& input) const {
  if (static_cast<int>(input.blocks.size()) != config_.max_path_length) {
    throw ShapeError("prepared graph has " + std::to_string(input.blocks.size()) +
                     " path blocks, model expects " +
                     std::to_string(config_.max_path_length));
  }
  const int n = input.num_nodes;
  const int d = config_.hidden_dim;
  const std::vector<Tensor> heads = attention_heads();
  const Dense update = update_layer();

  Tensor h = embed(input.node_features);
  for (int t = 0; t < config_.steps; ++t) {
    std::vector<Tensor> messages;
    std::vector<int> roots;
    Tensor m;
    for (const PathFeatureBlock& block : input.blocks) {
      if (block.num_paths() == 0) continue;
      std::vector<Tensor> parts;
      for (const auto& hop : block.hops) parts.push_back(gather_rows(h, hop));
      if (block.static_features.cols() > 0) parts.push_back(block.static_features);
      const Tensor msg = message_path(gather_rows(h, block.roots), concat(parts, 1),
                                      message_layer(block.length));
      if (config_.per_length_attention) {
        const Tensor part = attention_aggregate(h, msg, block.roots, heads, config_.leaky_slope);
        m = m.defined() ? add(m, part) : part;
      } else {
        messages.push_back(msg);
        roots.insert(roots.end(), block.roots.begin(), block.roots.end());
      }
    }
    if (!config_.per_length_attention && !messages.empty()) {
      const Tensor all = messages.size() == 1 ? messages.front() : concat(messages, 0);
      m = attention_aggregate(h, all, roots, heads, config_.leaky_slope);
    }
    if (!m.defined()) m = Tensor::zeros({n, d});
    h = node_update(h, m, update);
  }
  return readout(h, input.node_features);
}

Tensor PathMpnn::forward_standard(const Graph& graph) const {
  if (config_.mode != FeatureMode::kBase || config_.max_path_length != 1 ||
      config_.path_budget != 0) {
    throw ValidationError("forward_standard needs base mode with max_path_length 1");
  }
  const int n = graph.num_nodes();
  const int d = config_.hidden_dim;
  const Tensor x = Tensor::constant({n, graph.node_feature_width()}, graph.node_feature_matrix());

  std::vector<int> receivers;
  std::vector<int> senders;
  std::vector<double> edge_rows;
  for (int v = 0; v < n; ++v) {
    for (int w : graph.neighbors(v)) {
      receivers.push_back(v);
      senders.push_back(w);
      const auto e = graph.edge_features(v, w);
      edge_rows.insert(edge_rows.end(), e.begin(), e.end());
    }
  }
  const Tensor e_vw = Tensor::constant(
      {static_cast<int>(receivers.size()), graph.edge_feature_width()}, std::move(edge_rows));
  const std::vector<Tensor> heads = attention_heads();
  const Dense message = message_layer(1);
  const Dense update = update_layer();

  Tensor h = embed(x);
  for (int t = 0; t < config_.steps; ++t) {
    Tensor m = Tensor::zeros({n, d});
    if (!receivers.empty()) {
      const Tensor msg =
          message_standard(gather_rows(h, receivers), gather_rows(h, senders), e_vw, message);
      m = attention_aggregate(h, msg, receivers, heads, config_.leaky_slope);
    }
    h = node_update(h, m, update);
  }
  return readout(h, x);
}

}  // namespace pmpnn
