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

#include "celebprof/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "celebprof/error.hpp"

namespace celebprof::autograd {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMajor>;
using Map = Eigen::Map<RowMajor>;

thread_local bool g_grad_enabled = true;

using NodePtr = std::shared_ptr<detail::Node>;

MapC view(const detail::Node& n) { return MapC(n.value.data(), Eigen::Index(n.rows), Eigen::Index(n.cols)); }
MapC grad_view(const detail::Node& n) {
  return MapC(n.grad.data(), Eigen::Index(n.rows), Eigen::Index(n.cols));
}
Map grad_of(detail::Node& n) {
  n.ensure_grad();
  return Map(n.grad.data(), Eigen::Index(n.rows), Eigen::Index(n.cols));
}

Error dim_error(std::string_view op, const std::string& detail) {
  return data_error("dimension", fmt::format("{}: {}", op, detail));
}

std::string shape_str(const Tensor& t) { return fmt::format("[{}x{}]", t.rows(), t.cols()); }

// Creates the output node; records parents and the backward closure only when
// some input needs a gradient and recording is enabled.
Tensor make_result(std::size_t rows, std::size_t cols, std::vector<double> value,
                   std::initializer_list<const Tensor*> inputs,
                   std::function<void(detail::Node&)> backward_fn) {
  auto node = std::make_shared<detail::Node>();
  node->rows = rows;
  node->cols = cols;
  node->value = std::move(value);
  if (g_grad_enabled) {
    for (const Tensor* t : inputs) {
      if (t->requires_grad()) node->requires_grad = true;
    }
    if (node->requires_grad) {
      for (const Tensor* t : inputs) node->parents.push_back(t->node());
      node->backward = std::move(backward_fn);
    }
  }
  return Tensor(std::move(node));
}

template <typename F, typename DF>
Tensor unary(const Tensor& a, F f, DF df_from_output) {
  std::vector<double> out(a.size());
  auto in = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return make_result(a.rows(), a.cols(), std::move(out), {&a}, [df_from_output](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    for (std::size_t i = 0; i < self.value.size(); ++i) {
      p.grad[i] += self.grad[i] * df_from_output(self.value[i], p.value[i]);
    }
  });
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, bool requires_grad)
    : node_(std::make_shared<detail::Node>()) {
  node_->rows = rows;
  node_->cols = cols;
  node_->value.assign(rows * cols, 0.0);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::vector<double> values,
                    bool requires_grad) {
  if (values.size() != rows * cols) {
    throw data_error("dimension", fmt::format("tensor [{}x{}] given {} values", rows, cols,
                                              values.size()));
  }
  Tensor t(rows, cols, requires_grad);
  t.node_->value = std::move(values);
  return t;
}

double Tensor::item() const {
  if (size() != 1) throw data_error("dimension", "item() on a tensor with more than one value");
  return node_->value[0];
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw data_error("dimension", "backward() needs a scalar loss");
  }
  if (!loss.requires_grad()) return;
  // Iterative post-order DFS; graphs of long recurrences are deep.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack = {{loss.node().get(), 0}};
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss.node()->ensure_grad();
  loss.node()->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw dim_error("matmul", fmt::format("{} x {}", shape_str(a), shape_str(b)));
  }
  std::vector<double> out(a.rows() * b.cols());
  Map(out.data(), Eigen::Index(a.rows()), Eigen::Index(b.cols())).noalias() =
      view(*a.node()) * view(*b.node());
  return make_result(a.rows(), b.cols(), std::move(out), {&a, &b}, [](detail::Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) grad_of(pa).noalias() += grad_view(self) * view(pb).transpose();
    if (pb.requires_grad) grad_of(pb).noalias() += view(pa).transpose() * grad_view(self);
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw dim_error("add", fmt::format("{} + {}", shape_str(a), shape_str(b)));
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  return make_result(a.rows(), a.cols(), std::move(out), {&a, &b}, [](detail::Node& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      p->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
    }
  });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    throw dim_error("add_bias", fmt::format("{} + {}", shape_str(a), shape_str(bias)));
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  const std::size_t n = a.cols();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bias.values()[i % n];
  return make_result(a.rows(), n, std::move(out), {&a, &bias}, [n](detail::Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i % n] += self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw dim_error("mul", fmt::format("{} * {}", shape_str(a), shape_str(b)));
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  return make_result(a.rows(), a.cols(), std::move(out), {&a, &b}, [](detail::Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] += self.grad[i] * pa.value[i];
    }
  });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double y, double) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double y, double) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0 ? x : 0.0; },
               [](double, double x) { return x > 0 ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& a) {
  double s = 0;
  for (double v : a.values()) s += v;
  return make_result(1, 1, {s}, {&a}, [](detail::Node& self) {
    auto& p = *self.parents[0];
    p.ensure_grad();
    for (auto& g : p.grad) g += self.grad[0];
  });
}

Tensor embedding(const Tensor& table, std::span<const int> ids, int frozen_row) {
  const std::size_t d = table.cols();
  std::vector<double> out(ids.size() * d);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= table.rows()) {
      throw dim_error("embedding", fmt::format("id {} outside table {}", ids[r], shape_str(table)));
    }
    const auto src = table.values().subspan(static_cast<std::size_t>(ids[r]) * d, d);
    std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  std::vector<int> id_copy(ids.begin(), ids.end());
  return make_result(ids.size(), d, std::move(out), {&table},
                     [ids = std::move(id_copy), d, frozen_row](detail::Node& self) {
                       auto& p = *self.parents[0];
                       p.ensure_grad();
                       for (std::size_t r = 0; r < ids.size(); ++r) {
                         if (ids[r] == frozen_row) continue;
                         double* dst = p.grad.data() + static_cast<std::size_t>(ids[r]) * d;
                         const double* src = self.grad.data() + r * d;
                         for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
                       }
                     });
}

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  const std::size_t d = x.cols();
  if (d == 0 || weight.rows() % d != 0) {
    throw dim_error("conv1d", fmt::format("input {} with weight {}", shape_str(x), shape_str(weight)));
  }
  const std::size_t k = weight.rows() / d;
  const std::size_t f = weight.cols();
  if (k == 0 || k > x.rows()) {
    throw dim_error("conv1d", fmt::format("kernel {} longer than input {}", k, shape_str(x)));
  }
  if (bias.rows() != 1 || bias.cols() != f) {
    throw dim_error("conv1d", fmt::format("bias {} for {} filters", shape_str(bias), f));
  }
  const std::size_t out_rows = x.rows() - k + 1;
  using Strided = Eigen::Map<const RowMajor, 0, Eigen::OuterStride<>>;
  // Window p is the contiguous slice x[p*d, (p+k)*d).
  auto windows = [d, k, out_rows](const detail::Node& n) {
    return Strided(n.value.data(), Eigen::Index(out_rows), Eigen::Index(k * d),
                   Eigen::OuterStride<>(Eigen::Index(d)));
  };
  std::vector<double> out(out_rows * f);
  Map out_map(out.data(), Eigen::Index(out_rows), Eigen::Index(f));
  out_map.noalias() = windows(*x.node()) * view(*weight.node());
  out_map.rowwise() += view(*bias.node()).row(0);
  return make_result(out_rows, f, std::move(out), {&x, &weight, &bias},
                     [windows, d, k, out_rows](detail::Node& self) {
                       auto& px = *self.parents[0];
                       auto& pw = *self.parents[1];
                       auto& pb = *self.parents[2];
                       const auto g = grad_view(self);
                       if (pw.requires_grad) grad_of(pw).noalias() += windows(px).transpose() * g;
                       if (pb.requires_grad) grad_of(pb).row(0) += g.colwise().sum();
                       if (px.requires_grad) {
                         const RowMajor dwin = g * view(pw).transpose();
                         px.ensure_grad();
                         for (std::size_t p = 0; p < out_rows; ++p) {
                           double* dst = px.grad.data() + p * d;
                           for (std::size_t j = 0; j < k * d; ++j) {
                             dst[j] += dwin(Eigen::Index(p), Eigen::Index(j));
                           }
                         }
                       }
                     });
}

Tensor max_pool_rows(const Tensor& x, std::size_t valid_rows) {
  if (valid_rows == 0 || valid_rows > x.rows()) {
    throw dim_error("max_pool_rows",
                    fmt::format("valid_rows {} for input {}", valid_rows, shape_str(x)));
  }
  const std::size_t f = x.cols();
  std::vector<double> out(f);
  std::vector<std::size_t> arg(f, 0);
  for (std::size_t c = 0; c < f; ++c) {
    double best = x.at(0, c);
    for (std::size_t r = 1; r < valid_rows; ++r) {
      if (x.at(r, c) > best) {
        best = x.at(r, c);
        arg[c] = r;
      }
    }
    out[c] = best;
  }
  return make_result(1, f, std::move(out), {&x}, [arg = std::move(arg), f](detail::Node& self) {
    auto& p = *self.parents[0];
    p.ensure_grad();
    for (std::size_t c = 0; c < f; ++c) p.grad[arg[c] * f + c] += self.grad[c];
  });
}

Tensor row(const Tensor& a, std::size_t index) { 
  if (index >= a.rows()) throw dim_error("row", fmt::format("row {} of {}", index, shape_str(a)));
  const std::size_t n = a.cols();
  auto src = a.values().subspan(index * n, n);
  return make_result(1, n, {src.begin(), src.end()}, {&a}, [index, n](detail::Node& self) {
    auto& p = *self.parents[0];
    p.ensure_grad();
    for (std::size_t j = 0; j < n; ++j) p.grad[index * n + j] += self.grad[j];
  });
}

Tensor slice_cols(const Tensor& a, std::size_t start, std::size_t count) {
  if (start + count > a.cols()) {
    throw dim_error("slice_cols", fmt::format("columns [{}, {}) of {}", start, start + count,
                                              shape_str(a)));
  }
  const std::size_t n = a.cols();
  std::vector<double> out(a.rows() * count);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t j = 0; j < count; ++j) out[r * count + j] = a.values()[r * n + start + j];
  }
  return make_result(a.rows(), count, std::move(out), {&a}, [start, count, n](detail::Node& self) {
    auto& p = *self.parents[0];
    p.ensure_grad();
    for (std::size_t r = 0; r < self.rows; ++r) {
      for (std::size_t j = 0; j < count; ++j) p.grad[r * n + start + j] += self.grad[r * count + j];
    }
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw dim_error("concat_rows", "no inputs");
  const std::size_t n = parts.front().cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != n) {
      throw dim_error("concat_rows", fmt::format("{} vs {} columns", p.cols(), n));
    }
    rows += p.rows();
  }
  std::vector<double> out;
  out.reserve(rows * n);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());

  auto node = std::make_shared<detail::Node>();
  node->rows = rows;
  node->cols = n;
  node->value = std::move(out);
  if (g_grad_enabled) {
    for (const auto& p : parts) node->requires_grad = node->requires_grad || p.requires_grad();
    if (node->requires_grad) {
      for (const auto& p : parts) node->parents.push_back(p.node());
      node->backward = [](detail::Node& self) {
        std::size_t offset = 0;
        for (auto& p : self.parents) {
          if (p->requires_grad) {
            p->ensure_grad();
            for (std::size_t i = 0; i < p->value.size(); ++i) p->grad[i] += self.grad[offset + i];
          }
          offset += p->value.size();
        }
      };
    }
  }
  return Tensor(std::move(node));
}

Tensor select_rows(const Tensor& updated, const Tensor& previous, const std::vector<bool>& keep) {
  if (updated.rows() != previous.rows() || updated.cols() != previous.cols() ||
      keep.size() != updated.rows()) {
    throw dim_error("select_rows", fmt::format("{} / {} with {} flags", shape_str(updated),
                                               shape_str(previous), keep.size()));
  }
  const std::size_t n = updated.cols();
  std::vector<double> out(updated.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto src = (keep[r] ? updated : previous).values().subspan(r * n, n);
    std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(r * n));
  }
  return make_result(updated.rows(), n, std::move(out), {&updated, &previous},
                     [keep, n](detail::Node& self) {
                       for (int which = 0; which < 2; ++which) {
                         auto& p = *self.parents[static_cast<std::size_t>(which)];
                         if (!p.requires_grad) continue;
                         p.ensure_grad();
                         for (std::size_t r = 0; r < keep.size(); ++r) {
                           if (keep[r] != (which == 0)) continue;
                           for (std::size_t j = 0; j < n; ++j) p.grad[r * n + j] += self.grad[r * n + j];
                         }
                       }
                     });
}

std::vector<double> softmax_rows(const Tensor& logits) {
  const std::size_t k = logits.cols();
  std::vector<double> out(logits.values().begin(), logits.values().end());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    double* row = out.data() + r * k;
    const double mx = *std::max_element(row, row + k);
    double z = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row[j] = std::exp(row[j] - mx);
      z += row[j];
    }
    for (std::size_t j = 0; j < k; ++j) row[j] /= z;
  }
  return out;
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> targets) {
  if (targets.size() != logits.rows() || logits.rows() == 0) {
    throw dim_error("softmax_cross_entropy",
                    fmt::format("{} logits with {} targets", shape_str(logits), targets.size()));
  }
  const std::size_t k = logits.cols();
  std::vector<double> probs = softmax_rows(logits);
  double loss = 0;
  for (std::size_t r = 0; r < targets.size(); ++r) {
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= k) {
      throw dim_error("softmax_cross_entropy", fmt::format("target {} outside {} classes", targets[r], k));
    }
    // log-sum-exp form keeps the loss finite for saturated logits.
    const auto row = logits.values().subspan(r * k, k);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0;
    for (double v : row) z += std::exp(v - mx);
    loss += (mx + std::log(z)) - row[static_cast<std::size_t>(targets[r])];
  }
  const double b = static_cast<double>(targets.size());
  std::vector<int> t(targets.begin(), targets.end());
  return make_result(1, 1, {loss / b}, {&logits},
                     [probs = std::move(probs), t = std::move(t), k, b](detail::Node& self) {
                       auto& p = *self.parents[0];
                       p.ensure_grad();
                       const double g = self.grad[0] / b;
                       for (std::size_t r = 0; r < t.size(); ++r) {
                         for (std::size_t j = 0; j < k; ++j) {
                           const double onehot = static_cast<int>(j) == t[r] ? 1.0 : 0.0;
                           p.grad[r * k + j] += g * (probs[r * k + j] - onehot);
                         }
                       }
                     });
}

GradientCheckResult gradient_check(const std::function<Tensor()>& loss_fn,
                                   std::vector<Tensor> params, double epsilon) {
  for (auto& p : params) p.zero_grad();
  Tensor loss = loss_fn();
  if (!std::isfinite(loss.item())) throw data_error("non_finite", "loss is not finite");
  backward(loss);
  loss = Tensor();

  GradientCheckResult result;
  for (auto& p : params) {
    std::vector<double> analytic(p.size(), 0.0);
    if (!p.grad().empty()) analytic.assign(p.grad().begin(), p.grad().end());
    auto values = p.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      double plus = 0, minus = 0;
      {
        NoGradGuard guard;
        values[i] = saved + epsilon;
        plus = loss_fn().item();
        values[i] = saved - epsilon;
        minus = loss_fn().item();
      }
      values[i] = saved;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        throw data_error("non_finite", "perturbed loss is not finite");
      }
      const double numeric = (plus - minus) / (2 * epsilon);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
      result.max_relative_error =
          std::max(result.max_relative_error, std::abs(analytic[i] - numeric) / denom);
      ++result.checked;
    }
  }
  return result;
}

}  // namespace celebprof::autograd
