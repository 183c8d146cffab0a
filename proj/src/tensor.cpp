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

#include "pathmpnn/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "pathmpnn/error.hpp"

namespace pmpnn {

namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

std::atomic<std::uint64_t> g_next_id{1};

#ifdef NDEBUG
std::atomic<bool> g_finite_checks{false};
#else
std::atomic<bool> g_finite_checks{true};
#endif

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " +
                   to_string(b));
}

NodePtr new_node(const char* op, Shape shape, std::vector<double> value) {
  auto node = std::make_shared<Node>();
  node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  node->op = op;
  node->shape = shape;
  node->value = std::move(value);
  return node;
}

// Wraps a freshly computed value as an op output. Inputs and the backward
// closure are only kept when some input needs a gradient.
Tensor make_result(const char* op, Shape shape, std::vector<double> value,
                   std::vector<NodePtr> inputs, std::function<void(Node&)> backward) {
  if (g_finite_checks.load(std::memory_order_relaxed) && !all_finite(value)) {
    bool inputs_finite = true;
    for (const auto& in : inputs) inputs_finite = inputs_finite && all_finite(in->value);
    if (inputs_finite) {
      throw NumericError(std::string(op) + ": non-finite output from finite inputs");
    }
  }
  auto node = new_node(op, shape, std::move(value));
  const bool needs = std::any_of(inputs.begin(), inputs.end(),
                                 [](const NodePtr& in) { return in->requires_grad; });
  if (needs) {
    node->requires_grad = true;
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

void check_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw ShapeError(std::string(op) + ": undefined tensor");
}

void check_segments(const char* op, std::span<const int> ids, int rows, int num_segments) {
  if (static_cast<int>(ids.size()) != rows) {
    throw ShapeError(std::string(op) + ": " + std::to_string(ids.size()) +
                     " segment ids for " + std::to_string(rows) + " rows");
  }
  for (int id : ids) {
    if (id < 0 || id >= num_segments) {
      throw ShapeError(std::string(op) + ": segment id " + std::to_string(id) +
                       " outside [0, " + std::to_string(num_segments) + ")");
    }
  }
}

template <typename Forward, typename Derivative>
Tensor unary(const char* op, const Tensor& a, Forward f, Derivative df) {
  check_defined(a, op);
  std::vector<double> out(a.size());
  const auto in = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return make_result(op, a.shape(), std::move(out), {a.handle()}, [df](Node& self) {
    Node& x = *self.inputs[0];
    if (!x.requires_grad) return;
    auto& g = x.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += self.grad[i] * df(x.value[i], self.value[i]);
    }
  });
}

}  // namespace

std::string to_string(const Shape& shape) {
  return "[" + std::to_string(shape.rows) + ", " + std::to_string(shape.cols) + "]";
}

void set_finite_checks(bool enabled) { g_finite_checks.store(enabled); }
bool finite_checks_enabled() { return g_finite_checks.load(); }

Tensor Tensor::zeros(Shape shape) {
  return Tensor(new_node("constant", shape, std::vector<double>(shape.size(), 0.0)));
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  if (shape.rows < 0 || shape.cols < 0 || values.size() != shape.size()) {
    throw ShapeError("constant: " + std::to_string(values.size()) + " values for shape " +
                     to_string(shape));
  }
  return Tensor(new_node("constant", shape, std::move(values)));
}

Tensor Tensor::scalar(double value) { return constant({1, 1}, {value}); }

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  Tensor t = constant(shape, std::move(values));
  t.node_->op = "parameter";
  t.node_->requires_grad = true;
  return t;
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item: tensor of shape " + to_string(shape()));
  return node_->value[0];
}

std::vector<double> Tensor::grad() const {
  if (node_->grad.empty()) return std::vector<double>(node_->value.size(), 0.0);
  return node_->grad;
}

void backward(const Tensor& loss) {
  check_defined(loss, "backward");
  if (loss.size() != 1) {
    throw ShapeError("backward: loss must hold one element, got shape " +
                     to_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  // Collect the record reachable from the loss.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{loss.node()};
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    order.push_back(n);
    for (const auto& in : n->inputs) {
      if (in->requires_grad) stack.push_back(in.get());
    }
  }
  std::sort(order.begin(), order.end(), [](Node* a, Node* b) { return a->id > b->id; });

  loss.node()->ensure_grad()[0] += 1.0;
  for (Node* n : order) {
    if (!n->backward || n->grad.empty()) continue;
    n->backward(*n);
  }
  // Interior gradients are not needed once propagated; leaves keep theirs.
  for (Node* n : order) {
    if (n->backward) n->grad.clear();
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_defined(a, "matmul");
  check_defined(b, "matmul");
  if (a.cols() != b.rows()) shape_error("matmul", a.shape(), b.shape());
  const int m = a.rows();
  const int k = a.cols();
  const int n = b.cols();
  std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
  const double* A = a.values().data();
  const double* B = b.values().data();
  for (int i = 0; i < m; ++i) {
    double* row = out.data() + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double s = A[static_cast<std::size_t>(i) * k + p];
      if (s == 0.0) continue;
      const double* brow = B + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) row[j] += s * brow[j];
    }
  }
  return make_result("matmul", {m, n}, std::move(out), {a.handle(), b.handle()},
                     [m, k, n](Node& self) {
                       Node& x = *self.inputs[0];
                       Node& y = *self.inputs[1];
                       const double* G = self.grad.data();
                       if (x.requires_grad) {
                         // dA = G * B^T
                         auto& gx = x.ensure_grad();
                         for (int i = 0; i < m; ++i) {
                           const double* grow = G + static_cast<std::size_t>(i) * n;
                           for (int p = 0; p < k; ++p) {
                             const double* brow = y.value.data() + static_cast<std::size_t>(p) * n;
                             double acc = 0.0;
                             for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
                             gx[static_cast<std::size_t>(i) * k + p] += acc;
                           }
                         }
                       }
                       if (y.requires_grad) {
                         // dB = A^T * G
                         auto& gy = y.ensure_grad();
                         for (int i = 0; i < m; ++i) {
                           const double* grow = G + static_cast<std::size_t>(i) * n;
                           for (int p = 0; p < k; ++p) {
                             const double s = x.value[static_cast<std::size_t>(i) * k + p];
                             if (s == 0.0) continue;
                             double* gyrow = gy.data() + static_cast<std::size_t>(p) * n;
                             for (int j = 0; j < n; ++j) gyrow[j] += s * grow[j];
                           }
                         }
                       }
                     });
}

namespace {

enum class Broadcast { kSame, kRow, kColumn };

Broadcast broadcast_kind(const char* op, const Tensor& a, const Tensor& b, bool allow_column) {
  if (a.shape() == b.shape()) return Broadcast::kSame;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::kRow;
  if (allow_column && b.cols() == 1 && b.rows() == a.rows()) return Broadcast::kColumn;
  shape_error(op, a.shape(), b.shape());
}

std::size_t broadcast_index(Broadcast kind, std::size_t i, int cols) {
  switch (kind) {
    case Broadcast::kSame:
      return i;
    case Broadcast::kRow:
      return i % cols;
    case Broadcast::kColumn:
      return i / cols;
  }
  return i;
}

Tensor add_scaled(const char* op, const Tensor& a, const Tensor& b, double sign) {
  check_defined(a, op);
  check_defined(b, op);
  const Broadcast kind = broadcast_kind(op, a, b, false);
  const int cols = a.cols();
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * bv[broadcast_index(kind, i, cols)];
  return make_result(op, a.shape(), std::move(out), {a.handle(), b.handle()},
                     [kind, cols, sign](Node& self) {
                       Node& x = *self.inputs[0];
                       Node& y = *self.inputs[1];
                       if (x.requires_grad) {
                         auto& gx = x.ensure_grad();
                         for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
                       }
                       if (y.requires_grad) {
                         auto& gy = y.ensure_grad();
                         for (std::size_t i = 0; i < self.grad.size(); ++i) {
                           gy[broadcast_index(kind, i, cols)] += sign * self.grad[i];
                         }
                       }
                     });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_scaled("add", a, b, 1.0); }

Tensor sub(const Tensor& a, const Tensor& b) { return add_scaled("sub", a, b, -1.0); }

Tensor mul(const Tensor& a, const Tensor& b) {
  check_defined(a, "mul");
  check_defined(b, "mul");
  const Broadcast kind = broadcast_kind("mul", a, b, true);
  const int cols = a.cols();
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[broadcast_index(kind, i, cols)];
  return make_result("mul", a.shape(), std::move(out), {a.handle(), b.handle()},
                     [kind, cols](Node& self) {
                       Node& x = *self.inputs[0];
                       Node& y = *self.inputs[1];
                       if (x.requires_grad) {
                         auto& gx = x.ensure_grad();
                         for (std::size_t i = 0; i < gx.size(); ++i) {
                           gx[i] += self.grad[i] * y.value[broadcast_index(kind, i, cols)];
                         }
                       }
                       if (y.requires_grad) {
                         auto& gy = y.ensure_grad();
                         for (std::size_t i = 0; i < self.grad.size(); ++i) {
                           gy[broadcast_index(kind, i, cols)] += self.grad[i] * x.value[i];
                         }
                       }
                     });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      "scale", a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (axis != 0 && axis != 1) throw ShapeError("concat: axis must be 0 or 1");
  for (const auto& p : parts) check_defined(p, "concat");
  std::vector<NodePtr> inputs;
  std::vector<int> offsets;
  Shape shape = parts.front().shape();
  if (axis == 1) {
    shape.cols = 0;
    for (const auto& p : parts) {
      if (p.rows() != shape.rows) shape_error("concat", parts.front().shape(), p.shape());
      offsets.push_back(shape.cols);
      shape.cols += p.cols();
      inputs.push_back(p.handle());
    }
  } else {
    shape.rows = 0;
    for (const auto& p : parts) {
      if (p.cols() != shape.cols) shape_error("concat", parts.front().shape(), p.shape());
      offsets.push_back(shape.rows);
      shape.rows += p.rows();
      inputs.push_back(p.handle());
    }
  }
  std::vector<double> out(shape.size());
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto v = parts[k].values();
    const int pc = parts[k].cols();
    for (int r = 0; r < parts[k].rows(); ++r) {
      const std::size_t dst = axis == 1
                                  ? static_cast<std::size_t>(r) * shape.cols + offsets[k]
                                  : static_cast<std::size_t>(offsets[k] + r) * shape.cols;
      std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(r) * pc, pc, out.begin() + dst);
    }
  }
  return make_result("concat", shape, std::move(out), std::move(inputs),
                     [axis, offsets, shape](Node& self) {
                       for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                         Node& x = *self.inputs[k];
                         if (!x.requires_grad) continue;
                         auto& g = x.ensure_grad();
                         const int pc = x.shape.cols;
                         for (int r = 0; r < x.shape.rows; ++r) {
                           const std::size_t src =
                               axis == 1 ? static_cast<std::size_t>(r) * shape.cols + offsets[k]
                                         : static_cast<std::size_t>(offsets[k] + r) * shape.cols;
                           for (int c = 0; c < pc; ++c) {
                             g[static_cast<std::size_t>(r) * pc + c] += self.grad[src + c];
                           }
                         }
                       }
                     });
}

Tensor slice_cols(const Tensor& a, int begin, int count) {
  check_defined(a, "slice_cols");
  if (begin < 0 || count < 0 || begin + count > a.cols()) {
    throw ShapeError("slice_cols: columns [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") of " + to_string(a.shape()));
  }
  const int rows = a.rows();
  const int cols = a.cols();
  std::vector<double> out(static_cast<std::size_t>(rows) * count);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < count; ++c) {
      out[static_cast<std::size_t>(r) * count + c] = a.at(r, begin + c);
    }
  }
  return make_result("slice_cols", {rows, count}, std::move(out), {a.handle()},
                     [begin, count, rows, cols](Node& self) {
                       auto& g = self.inputs[0]->ensure_grad();
                       for (int r = 0; r < rows; ++r) {
                         for (int c = 0; c < count; ++c) {
                           g[static_cast<std::size_t>(r) * cols + begin + c] +=
                               self.grad[static_cast<std::size_t>(r) * count + c];
                         }
                       }
                     });
}

Tensor transpose(const Tensor& a) {
  check_defined(a, "transpose");
  const int rows = a.rows();
  const int cols = a.cols();
  std::vector<double> out(a.size());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out[static_cast<std::size_t>(c) * rows + r] = a.at(r, c);
  }
  return make_result("transpose", {cols, rows}, std::move(out), {a.handle()},
                     [rows, cols](Node& self) {
                       auto& g = self.inputs[0]->ensure_grad();
                       for (int r = 0; r < rows; ++r) {
                         for (int c = 0; c < cols; ++c) {
                           g[static_cast<std::size_t>(r) * cols + c] +=
                               self.grad[static_cast<std::size_t>(c) * rows + r];
                         }
                       }
                     });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      "sigmoid", a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary(
      "leaky_relu", a, [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Tensor square(const Tensor& a) {
  return unary(
      "square", a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor sqrt(const Tensor& a) {
  return unary(
      "sqrt", a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Tensor sum(const Tensor& a) {
  check_defined(a, "sum");
  double total = 0.0;
  for (double x : a.values()) total += x;
  return make_result("sum", {1, 1}, {total}, {a.handle()}, [](Node& self) {
    auto& g = self.inputs[0]->ensure_grad();
    for (double& x : g) x += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  check_defined(a, "mean");
  if (a.size() == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor softmax(const Tensor& a, int axis) {
  check_defined(a, "softmax");
  if (axis != 0 && axis != 1) throw ShapeError("softmax: axis must be 0 or 1");
  const int rows = a.rows();
  const int cols = a.cols();
  // Group g runs over `count` elements spaced `stride` apart.
  const int groups = axis == 1 ? rows : cols;
  const int count = axis == 1 ? cols : rows;
  const std::size_t group_step = axis == 1 ? cols : 1;
  const std::size_t stride = axis == 1 ? 1 : cols;
  const auto in = a.values();
  std::vector<double> out(in.size());
  for (int g = 0; g < groups; ++g) {
    const std::size_t base = g * group_step;
    double hi = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < count; ++i) hi = std::max(hi, in[base + i * stride]);
    double z = 0.0;
    for (int i = 0; i < count; ++i) {
      out[base + i * stride] = std::exp(in[base + i * stride] - hi);
      z += out[base + i * stride];
    }
    for (int i = 0; i < count; ++i) out[base + i * stride] /= z;
  }
  return make_result("softmax", a.shape(), std::move(out), {a.handle()},
                     [groups, count, group_step, stride](Node& self) {
                       auto& g = self.inputs[0]->ensure_grad();
                       for (int k = 0; k < groups; ++k) {
                         const std::size_t base = k * group_step;
                         double dot = 0.0;
                         for (int i = 0; i < count; ++i) {
                           dot += self.grad[base + i * stride] * self.value[base + i * stride];
                         }
                         for (int i = 0; i < count; ++i) {
                           const std::size_t j = base + i * stride;
                           g[j] += self.value[j] * (self.grad[j] - dot);
                         }
                       }
                     });
}

Tensor gather_rows(const Tensor& a, std::span<const int> indices) {
  check_defined(a, "gather_rows");
  const int cols = a.cols();
  for (int i : indices) {
    if (i < 0 || i >= a.rows()) {
      throw ShapeError("gather_rows: row " + std::to_string(i) + " outside " +
                       to_string(a.shape()));
    }
  }
  const auto in = a.values();
  std::vector<double> out(indices.size() * cols);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(indices[r]) * cols, cols,
                out.begin() + static_cast<std::ptrdiff_t>(r) * cols);
  }
  std::vector<int> idx(indices.begin(), indices.end());
  return make_result("gather_rows", {static_cast<int>(indices.size()), cols}, std::move(out),
                     {a.handle()}, [idx = std::move(idx), cols](Node& self) {
                       auto& g = self.inputs[0]->ensure_grad();
                       for (std::size_t r = 0; r < idx.size(); ++r) {
                         double* dst = g.data() + static_cast<std::size_t>(idx[r]) * cols;
                         const double* src = self.grad.data() + r * cols;
                         for (int c = 0; c < cols; ++c) dst[c] += src[c];
                       }
                     });
}

Tensor segment_sum(const Tensor& values, std::span<const int> segment_ids, int num_segments) {
  return segment_sum(values, segment_ids, num_segments, {});
}

Tensor segment_sum(const Tensor& values, std::span<const int> segment_ids, int num_segments,
                   std::span<const double> row_weights) {
  check_defined(values, "segment_sum");
  check_segments("segment_sum", segment_ids, values.rows(), num_segments);
  if (!row_weights.empty() && static_cast<int>(row_weights.size()) != values.rows()) {
    throw ShapeError("segment_sum: " + std::to_string(row_weights.size()) + " weights for " +
                     std::to_string(values.rows()) + " rows");
  }
  if (num_segments < 1) throw ShapeError("segment_sum: need at least one segment");
  const int cols = values.cols();
  const auto in = values.values();
  std::vector<double> out(static_cast<std::size_t>(num_segments) * cols, 0.0);
  for (std::size_t r = 0; r < segment_ids.size(); ++r) {
    const double w = row_weights.empty() ? 1.0 : row_weights[r];
    double* dst = out.data() + static_cast<std::size_t>(segment_ids[r]) * cols;
    const double* src = in.data() + r * cols;
    for (int c = 0; c < cols; ++c) dst[c] += w * src[c];
  }
  std::vector<int> ids(segment_ids.begin(), segment_ids.end());
  std::vector<double> weights(row_weights.begin(), row_weights.end());
  return make_result("segment_sum", {num_segments, cols}, std::move(out), {values.handle()},
                     [ids = std::move(ids), weights = std::move(weights), cols](Node& self) {
                       auto& g = self.inputs[0]->ensure_grad();
                       for (std::size_t r = 0; r < ids.size(); ++r) {
                         const double w = weights.empty() ? 1.0 : weights[r];
                         const double* src = self.grad.data() + static_cast<std::size_t>(ids[r]) * cols;
                         double* dst = g.data() + r * cols;
                         for (int c = 0; c < cols; ++c) dst[c] += w * src[c];
                       }
                     });
}

Tensor segment_softmax(const Tensor& scores, std::span<const int> segment_ids,
                       int num_segments) {
  check_defined(scores, "segment_softmax");
  if (scores.cols() != 1) {
    throw ShapeError("segment_softmax: expects a column of scores, got " +
                     to_string(scores.shape()));
  }
  check_segments("segment_softmax", segment_ids, scores.rows(), num_segments);
  const auto in = scores.values();
  std::vector<double> hi(num_segments, -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < segment_ids.size(); ++r) {
    hi[segment_ids[r]] = std::max(hi[segment_ids[r]], in[r]);
  }
  std::vector<double> out(in.size());
  std::vector<double> z(num_segments, 0.0);
  for (std::size_t r = 0; r < segment_ids.size(); ++r) {
    out[r] = std::exp(in[r] - hi[segment_ids[r]]);
    z[segment_ids[r]] += out[r];
  }
  for (std::size_t r = 0; r < segment_ids.size(); ++r) out[r] /= z[segment_ids[r]];
  std::vector<int> ids(segment_ids.begin(), segment_ids.end());
  return make_result("segment_softmax", scores.shape(), std::move(out), {scores.handle()},
                     [ids = std::move(ids), num_segments](Node& self) {
                       std::vector<double> dot(num_segments, 0.0);
                       for (std::size_t r = 0; r < ids.size(); ++r) {
                         dot[ids[r]] += self.grad[r] * self.value[r];
                       }
                       auto& g = self.inputs[0]->ensure_grad();
                       for (std::size_t r = 0; r < ids.size(); ++r) {
                         g[r] += self.value[r] * (self.grad[r] - dot[ids[r]]);
                       }
                     });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels,
                             std::span<const int> rows) {
  check_defined(logits, "softmax_cross_entropy");
  if (static_cast<int>(labels.size()) != logits.rows()) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                     " labels for logits " + to_string(logits.shape()));
  }
  if (rows.empty()) throw ShapeError("softmax_cross_entropy: no rows selected");
  const int classes = logits.cols();
  const auto in = logits.values();
  std::vector<double> probs(rows.size() * classes);
  double loss = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const int r = rows[k];
    const int label = labels[r];
    if (r < 0 || r >= logits.rows() || label < 0 || label >= classes) {
      throw ShapeError("softmax_cross_entropy: bad row or label at row " + std::to_string(r));
    }
    const double* x = in.data() + static_cast<std::size_t>(r) * classes;
    const double hi = *std::max_element(x, x + classes);
    double z = 0.0;
    for (int c = 0; c < classes; ++c) z += std::exp(x[c] - hi);
    for (int c = 0; c < classes; ++c) probs[k * classes + c] = std::exp(x[c] - hi) / z;
    loss -= (x[label] - hi) - std::log(z);
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  std::vector<int> rows_copy(rows.begin(), rows.end());
  std::vector<int> labels_copy;
  for (int r : rows) labels_copy.push_back(labels[r]);
  return make_result("softmax_cross_entropy", {1, 1}, {loss * inv}, {logits.handle()},
                     [rows_copy = std::move(rows_copy), labels_copy = std::move(labels_copy),
                      probs = std::move(probs), classes, inv](Node& self) {
                       auto& g = self.inputs[0]->ensure_grad();
                       const double up = self.grad[0] * inv;
                       for (std::size_t k = 0; k < rows_copy.size(); ++k) {
                         double* dst = g.data() + static_cast<std::size_t>(rows_copy[k]) * classes;
                         for (int c = 0; c < classes; ++c) {
                           const double target = c == labels_copy[k] ? 1.0 : 0.0;
                           dst[c] += up * (probs[k * classes + c] - target);
                         }
                       }
                     });
}

Tensor dropout(const Tensor& a, double rate, std::mt19937_64& rng) {
  check_defined(a, "dropout");
  if (rate < 0.0 || rate >= 1.0) throw ShapeError("dropout: rate must lie in [0, 1)");
  if (rate == 0.0) return a;
  std::bernoulli_distribution keep(1.0 - rate);
  std::vector<double> mask(a.size());
  for (double& m : mask) m = keep(rng) ? 1.0 / (1.0 - rate) : 0.0;
  return mul(a, Tensor::constant(a.shape(), std::move(mask)));
}

LstmState lstm_cell(const Tensor& input, const LstmState& state, const Tensor& input_weights,
                    const Tensor& hidden_weights, const Tensor& bias) {
  const int hidden = state.h.cols();
  if (input_weights.cols() != 4 * hidden || hidden_weights.rows() != hidden ||
      hidden_weights.cols() != 4 * hidden || bias.cols() != 4 * hidden ||
      state.c.shape() != state.h.shape()) {
    shape_error("lstm_cell", input_weights.shape(), hidden_weights.shape());
  }
  const Tensor gates =
      add(add(matmul(input, input_weights), matmul(state.h, hidden_weights)), bias);
  const Tensor i = sigmoid(slice_cols(gates, 0, hidden));
  const Tensor f = sigmoid(slice_cols(gates, hidden, hidden));
  const Tensor g = tanh(slice_cols(gates, 2 * hidden, hidden));
  const Tensor o = sigmoid(slice_cols(gates, 3 * hidden, hidden));
  const Tensor c = add(mul(f, state.c), mul(i, g));
  const Tensor h = mul(o, tanh(c));
  return {h, c};
}

}  // namespace pmpnn
