// Copyright 2026 The Authors.
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

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace celebprof::autograd {

namespace detail {

struct Node {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;  // empty until a gradient flows in
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
  }
};

}  // namespace detail

// Dense rank-2 tensor (row-major) with an optional gradient. Copies share the
// underlying storage; ops record the graph needed by backward().
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, bool requires_grad = false);
  static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> values,
                     bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  std::size_t rows() const { return node_->rows; }
  std::size_t cols() const { return node_->cols; }
  std::size_t size() const { return node_->value.size(); }
  std::vector<std::size_t> shape() const { return {rows(), cols()}; }

  std::span<double> values() { return node_->value; }
  std::span<const double> values() const { return node_->value; }
  double at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  // Empty span when no gradient has been accumulated yet.
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  void zero_grad();

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// Disables graph recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Accumulates d(loss)/d(t) into every requires_grad tensor reachable from
// the 1x1 `loss`.
void backward(const Tensor& loss);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
// a[m x n] + bias[1 x n] broadcast over rows.
Tensor add_bias(const Tensor& a, const Tensor& bias);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor sum(const Tensor& a);

// Rows of `table` selected by `ids`. The gradient of `frozen_row` (if
// non-negative) is discarded so that the padding vector stays fixed.
Tensor embedding(const Tensor& table, std::span<const int> ids, int frozen_row = -1);

// Valid 1D convolution along the rows of x[L x D] with weight[(k*D) x F]
// (the k input rows of a window flattened in order) and bias[1 x F].
// Output is [(L-k+1) x F].
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias);

// Column-wise max over the first `valid_rows` rows: [L x F] -> [1 x F].
Tensor max_pool_rows(const Tensor& x, std::size_t valid_rows);

Tensor row(const Tensor& a, std::size_t index);
Tensor slice_cols(const Tensor& a, std::size_t start, std::size_t count);
Tensor concat_rows(const std::vector<Tensor>& parts);

// Row r of the result is taken from `updated` when keep[r] is true, from
// `previous` otherwise.
Tensor select_rows(const Tensor& updated, const Tensor& previous, const std::vector<bool>& keep);

// Mean softmax cross-entropy over the rows of logits[B x K].
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> targets);

// Row-wise softmax of plain values (no graph).
std::vector<double> softmax_rows(const Tensor& logits);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
};

// Compares backward() against central differences (f(x+e) - f(x-e)) / 2e for
// every element of `params`. Relative error uses max(|a|, |n|, 1e-8).
GradientCheckResult gradient_check(const std::function<Tensor()>& loss_fn,
                                   std::vector<Tensor> params, double epsilon = 1e-5);

}  // namespace celebprof::autograd
