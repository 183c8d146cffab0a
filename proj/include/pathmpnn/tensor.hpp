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

// Dense double-precision matrices with define-by-run reverse-mode
// differentiation. Every op allocates a node that remembers its inputs and a
// backward closure; node ids increase in creation order, so sorting the nodes
// reachable from a loss by descending id replays the record in exact reverse.

#ifndef PATHMPNN_TENSOR_HPP_
#define PATHMPNN_TENSOR_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pmpnn {

struct Shape {
  int rows = 0;
  int cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& shape);

namespace detail {

struct Node {
  std::uint64_t id = 0;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something flows into it
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  std::vector<double>& ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor scalar(double value);
  // Leaf that accumulates gradients.
  static Tensor parameter(Shape shape, std::vector<double> values);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int rows() const { return node_->shape.rows; }
  int cols() const { return node_->shape.cols; }
  std::size_t size() const { return node_->value.size(); }
  std::uint64_t id() const { return node_->id; }
  const char* op() const { return node_->op; }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const double> values() const { return node_->value; }
  // For optimizers and finite differences on leaves only.
  std::span<double> mutable_values() { return node_->value; }
  double at(int r, int c) const { return node_->value[static_cast<std::size_t>(r) * cols() + c]; }
  double item() const;

  bool has_grad() const { return !node_->grad.empty(); }
  // Zeros when nothing has been accumulated yet.
  std::vector<double> grad() const;
  void zero_grad() { node_->grad.clear(); }

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& handle() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// Rejects non-finite forward results produced from finite inputs. On by default
// in debug builds.
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

// Populates grad on every tensor that requires it and feeds `loss`.
// Gradients accumulate additively across calls and across multiple uses.
// Throws ShapeError unless loss holds exactly one element.
void backward(const Tensor& loss);

// ---- forward ops; all throw ShapeError naming the op and both shapes -------

Tensor matmul(const Tensor& a, const Tensor& b);
// b has a's shape, or shape [1, cols] (broadcast over rows).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
// b has a's shape, [rows, 1] (per-row scale) or [1, cols] (per-column scale).
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
// axis 0 stacks rows, axis 1 joins columns.
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice_cols(const Tensor& a, int begin, int count);
Tensor transpose(const Tensor& a);

Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor square(const Tensor& a);
// Gradient at exactly zero is taken as zero.
Tensor sqrt(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// axis 1: each row sums to one; axis 0: each column sums to one.
Tensor softmax(const Tensor& a, int axis);

// Rows that pick a[indices[i]].
Tensor gather_rows(const Tensor& a, std::span<const int> indices);
// out[s] = sum of rows i with segment_ids[i] == s.
Tensor segment_sum(const Tensor& values, std::span<const int> segment_ids, int num_segments);
// Same with a constant weight per row (normalised adjacency, path weights).
Tensor segment_sum(const Tensor& values, std::span<const int> segment_ids, int num_segments,
                   std::span<const double> row_weights);
// Softmax of a column of scores within each segment.
Tensor segment_softmax(const Tensor& scores, std::span<const int> segment_ids,
                       int num_segments);

// Mean negative log-likelihood of labels[r] under softmax(logits row r), over
// the listed rows.
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels,
                             std::span<const int> rows);
// Inverted dropout; identity when rate == 0.
Tensor dropout(const Tensor& a, double rate, std::mt19937_64& rng);

struct LstmState {
  Tensor h;
  Tensor c;
};

// Gates packed as [input, forget, cell, output] in the 4*hidden columns of
// input_weights [in, 4h], hidden_weights [h, 4h] and bias [1, 4h].
LstmState lstm_cell(const Tensor& input, const LstmState& state, const Tensor& input_weights,
                    const Tensor& hidden_weights, const Tensor& bias);

}  // namespace pmpnn

#endif  // PATHMPNN_TENSOR_HPP_
