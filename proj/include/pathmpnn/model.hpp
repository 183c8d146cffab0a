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

#ifndef PATHMPNN_MODEL_HPP_
#define PATHMPNN_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pathmpnn/graph.hpp"
#include "pathmpnn/optim.hpp"
#include "pathmpnn/paths.hpp"
#include "pathmpnn/tensor.hpp"

namespace pmpnn {

enum class FeatureMode { kBase, kSubstructure, kGeometry };

std::string_view to_string(FeatureMode mode);
FeatureMode parse_feature_mode(std::string_view text);

struct ModelConfig {
  int hidden_dim = 32;
  // Propagation steps T.
  int steps = 3;
  // Longest path length; messages use every length 1..max_path_length.
  int max_path_length = 1;
  FeatureMode mode = FeatureMode::kBase;
  int set2set_steps = 3;
  int attention_heads = 1;
  bool exact_length_only = false;
  // One attention softmax per path length instead of a joint one.
  bool per_length_attention = false;
  // Random-walk paths per root; 0 enumerates every simple path.
  int path_budget = 0;
  double leaky_slope = 0.2;
  int num_targets = 1;
  bool explicit_hydrogens = false;
  std::uint64_t seed = 0;

  // Throws ValidationError on non-positive sizes or path length outside 1..3.
  void validate() const;
};

// y = x W + b.
struct Dense {
  Tensor weight;
  Tensor bias;

  Tensor apply(const Tensor& x) const;
};

// All paths of one length k in one graph, as parallel index arrays plus the
// parameter-free part of their features.
struct PathFeatureBlock {
  int length = 0;
  std::vector<int> roots;
  // hops[i][p] is node v_{i+1} of path p.
  std::vector<std::vector<int>> hops;
  // [paths, k * edge width + mode width]: edge features along the path, then
  // substructure or geometry features.
  Tensor static_features;

  int num_paths() const { return static_cast<int>(roots.size()); }
};

// Parameter-free precomputation for one graph, reusable across epochs.
struct PreparedGraph {
  int num_nodes = 0;
  Tensor node_features;
  std::vector<PathFeatureBlock> blocks;  // blocks[k - 1] holds length k
};

// Width of the mode-specific feature tail for paths of length k.
int mode_feature_width(FeatureMode mode, int length);

// Enumerates (or samples) the paths of every length up to config.max_path_length
// and assembles their static features. Throws ValidationError for geometry mode
// on a graph without coordinates.
PreparedGraph prepare_graph(const Graph& graph, const ModelConfig& config);

// Interaction-network message relu([h_v, h_w, e_vw] W + b), one row per edge.
Tensor message_standard(const Tensor& h_v, const Tensor& h_w, const Tensor& e_vw,
                        const Dense& layer);

// relu([h_v, path_block] W_k + b_k), one row per path.
Tensor message_path(const Tensor& h_root, const Tensor& path_block, const Dense& layer);

// Graph-attention aggregation of messages into their root nodes. Scores are
// leaky_relu([h_v, msg] a); weights are softmaxed per root and the weighted
// messages summed. Multiple heads are averaged. Roots without messages get 0.
Tensor attention_aggregate(const Tensor& node_states, const Tensor& messages,
                           std::span<const int> roots, std::span<const Tensor> heads,
                           double slope);

// sigmoid([h, m] W + b).
Tensor node_update(const Tensor& states, const Tensor& messages, const Dense& layer);

struct Set2SetParams {
  Dense memory;  // projects [h_v^T, x_v] to the hidden width
  Tensor lstm_input_weights;
  Tensor lstm_hidden_weights;
  Tensor lstm_bias;
};

// Permutation-invariant readout: returns [1, 2 * hidden] = [query, read].
Tensor set2set_readout(const Tensor& node_states, const Tensor& node_features,
                       const Set2SetParams& params, int steps);

class PathMpnn {
 public:
  PathMpnn(ModelConfig config, int node_feature_width, int edge_feature_width);

  const ModelConfig& config() const { return config_; }
  int node_feature_width() const { return node_width_; }
  int edge_feature_width() const { return edge_width_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }

  PreparedGraph prepare(const Graph& graph) const;
  // [1, num_targets].
  Tensor forward(const PreparedGraph& input) const;
  Tensor forward(const Graph& graph) const { return forward(prepare(graph)); }

  // Reference message-passing loop that iterates graph edges directly instead of
  // enumerated paths. Only valid for base mode with max_path_length == 1, where
  // it must agree with forward() exactly.
  Tensor forward_standard(const Graph& graph) const;

  Dense message_layer(int length) const;
  std::vector<Tensor> attention_heads() const;
  Dense update_layer() const;
  Set2SetParams readout_params() const;

 private:
  Tensor embed(const Tensor& node_features) const;
  Tensor readout(const Tensor& states, const Tensor& node_features) const;

  ModelConfig config_;
  int node_width_;
  int edge_width_;
  ParameterSet params_;
};

}  // namespace pmpnn

#endif  // PATHMPNN_MODEL_HPP_
