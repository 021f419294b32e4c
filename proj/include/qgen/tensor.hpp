#pragma once

// Dense float64 matrices with tape-free reverse-mode differentiation.
//
// Every value is a rows x cols matrix (vectors are n x 1 columns, scalars are
// 1 x 1). Operations never broadcast: each op states its shape rule and throws
// NumericError naming both shapes when it is violated. The graph is built by
// the ops themselves; backward() walks it in reverse topological order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "qgen/error.hpp"

namespace qgen {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

inline std::string to_string(Shape s) {
  return "(" + std::to_string(s.rows) + "x" + std::to_string(s.cols) + ")";
}

// Guard used inside every log so that zero probabilities stay finite.
inline constexpr double kLogEps = 1e-12;

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  std::vector<std::shared_ptr<Node>> parents;
  // Pushes this node's grad into its parents' grads.
  std::function<void(Node&)> backward;
  std::string_view op = "leaf";

  double& at(std::size_t r, std::size_t c) { return data[r * shape.cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * shape.cols + c]; }

  Node() = default;
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  // Long chains would otherwise recurse once per node on teardown.
  ~Node() {
    std::vector<std::shared_ptr<Node>> pending = std::move(parents);
    while (!pending.empty()) {
      std::shared_ptr<Node> n = std::move(pending.back());
      pending.pop_back();
      if (n && n.use_count() == 1) {
        for (auto& p : n->parents) pending.push_back(std::move(p));
        n->parents.clear();
        n->backward = nullptr;
      }
    }
  }
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::size_t rows, std::size_t cols) {
    return from(rows, cols, std::vector<double>(rows * cols, 0.0));
  }

  static Tensor filled(std::size_t rows, std::size_t cols, double value) {
    return from(rows, cols, std::vector<double>(rows * cols, value));
  }

  static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> values) {
    if (values.size() != rows * cols) {
      throw NumericError("Tensor::from: " + std::to_string(values.size()) +
                         " values do not fill shape " + to_string(Shape{rows, cols}));
    }
    auto node = std::make_shared<detail::Node>();
    node->shape = {rows, cols};
    node->data = std::move(values);
    node->grad.assign(rows * cols, 0.0);
    return Tensor(std::move(node));
  }

  static Tensor column(std::vector<double> values) {
    const auto n = values.size();
    return from(n, 1, std::move(values));
  }

  static Tensor scalar(double v) { return from(1, 1, {v}); }

  bool defined() const { return node_ != nullptr; }
  Shape shape() const { return node_->shape; }
  std::size_t rows() const { return node_->shape.rows; }
  std::size_t cols() const { return node_->shape.cols; }
  std::size_t size() const { return node_->shape.size(); }
  std::string_view op() const { return node_->op; }

  std::span<double> data() { return node_->data; }
  std::span<const double> data() const { return node_->data; }
  std::span<double> grad() { return node_->grad; }
  std::span<const double> grad() const { return node_->grad; }

  double& operator()(std::size_t r, std::size_t c) { return node_->at(r, c); }
  double operator()(std::size_t r, std::size_t c) const { return node_->at(r, c); }

  double item() const {
    if (size() != 1) throw NumericError("Tensor::item on shape " + to_string(shape()));
    return node_->data[0];
  }

  void zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

  // Copy of the values with no history.
  Tensor detach() const { return from(rows(), cols(), node_->data); }

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& shared() const { return node_; }

  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

namespace detail {

inline Tensor make_result(Shape shape, std::string_view op, std::vector<Tensor> parents,
                          std::vector<double> data, std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = shape;
  node->data = std::move(data);
  node->grad.assign(shape.size(), 0.0);
  node->op = op;
  node->parents.reserve(parents.size());
  for (auto& p : parents) node->parents.push_back(p.shared());
  node->backward = std::move(backward);
  return Tensor(std::move(node));
}

inline void require_same_shape(std::string_view op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw NumericError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                       to_string(b.shape()));
  }
}

template <typename F, typename DF>
Tensor unary(std::string_view op, const Tensor& a, F f, DF df) {
  std::vector<double> out(a.size());
  auto in = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return make_result(a.shape(), op, {a}, std::move(out), [df](Node& self) {
    Node& x = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      x.grad[i] += self.grad[i] * df(x.data[i], self.data[i]);
    }
  });
}

}  // namespace detail

// (r x k) * (k x c) -> (r x c)
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw NumericError("matmul: shape mismatch " + to_string(a.shape()) + " vs " +
                       to_string(b.shape()));
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  std::vector<double> out(n * m, 0.0);
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      const double* brow = &B[p * m];
      double* orow = &out[i * m];
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return detail::make_result({n, m}, "matmul", {a, b}, std::move(out), [n, k, m](detail::Node& self) {
    detail::Node& x = *self.parents[0];
    detail::Node& y = *self.parents[1];
    const double* G = self.grad.data();
    // dA = G * B^T
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        double acc = 0.0;
        const double* brow = &y.data[p * m];
        const double* grow = &G[i * m];
        for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
        x.grad[i * k + p] += acc;
      }
    }
    // dB = A^T * G
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const double av = x.data[i * k + p];
        if (av == 0.0) continue;
        double* yg = &y.grad[p * m];
        const double* grow = &G[i * m];
        for (std::size_t j = 0; j < m; ++j) yg[j] += av * grow[j];
      }
    }
  });
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::require_same_shape("add", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return detail::make_result(a.shape(), "add", {a, b}, std::move(out), [](detail::Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      self.parents[0]->grad[i] += self.grad[i];
      self.parents[1]->grad[i] += self.grad[i];
    }
  });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::require_same_shape("sub", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return detail::make_result(a.shape(), "sub", {a, b}, std::move(out), [](detail::Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      self.parents[0]->grad[i] += self.grad[i];
      self.parents[1]->grad[i] -= self.grad[i];
    }
  });
}

// Elementwise (Hadamard) product.
inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::require_same_shape("mul", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return detail::make_result(a.shape(), "mul", {a, b}, std::move(out), [](detail::Node& self) {
    detail::Node& x = *self.parents[0];
    detail::Node& y = *self.parents[1];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      x.grad[i] += self.grad[i] * y.data[i];
      y.grad[i] += self.grad[i] * x.data[i];
    }
  });
}

inline Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * s;
  return detail::make_result(a.shape(), "scale", {a}, std::move(out), [s](detail::Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) self.parents[0]->grad[i] += self.grad[i] * s;
  });
}

// Multiplies every entry of `a` by the 1x1 tensor `s`.
inline Tensor scale(const Tensor& a, const Tensor& s) {
  if (s.size() != 1) {
    throw NumericError("scale: factor must be 1x1, got " + to_string(s.shape()) + " for " +
                       to_string(a.shape()));
  }
  const double sv = s.data()[0];
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * sv;
  return detail::make_result(a.shape(), "scale_by", {a, s}, std::move(out), [](detail::Node& self) {
    detail::Node& x = *self.parents[0];
    detail::Node& f = *self.parents[1];
    double acc = 0.0;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      x.grad[i] += self.grad[i] * f.data[0];
      acc += self.grad[i] * x.data[i];
    }
    f.grad[0] += acc;
  });
}

inline Tensor transpose(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a(i, j);
  return detail::make_result({c, r}, "transpose", {a}, std::move(out), [r, c](detail::Node& self) {
    detail::Node& x = *self.parents[0];
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) x.grad[i * c + j] += self.grad[j * r + i];
  });
}

// Stacks matrices with equal column counts on top of each other.
inline Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw NumericError("concat_rows: no inputs");
  const std::size_t c = parts[0].cols();
  std::size_t r = 0;
  for (const auto& p : parts) {
    if (p.cols() != c) {
      throw NumericError("concat_rows: shape mismatch " + to_string(parts[0].shape()) + " vs " +
                         to_string(p.shape()));
    }
    r += p.rows();
  }
  std::vector<double> out;
  out.reserve(r * c);
  for (const auto& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  return detail::make_result({r, c}, "concat_rows", parts, std::move(out), [](detail::Node& self) {
    std::size_t offset = 0;
    for (auto& p : self.parents) {
      for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] += self.grad[offset + i];
      offset += p->grad.size();
    }
  });
}

// Places matrices with equal row counts side by side.
inline Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw NumericError("concat_cols: no inputs");
  const std::size_t r = parts[0].rows();
  std::size_t c = 0;
  for (const auto& p : parts) {
    if (p.rows() != r) {
      throw NumericError("concat_cols: shape mismatch " + to_string(parts[0].shape()) + " vs " +
                         to_string(p.shape()));
    }
    c += p.cols();
  }
  std::vector<double> out(r * c);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < p.cols(); ++j) out[i * c + offset + j] = p(i, j);
    offset += p.cols();
  }
  return detail::make_result({r, c}, "concat_cols", parts, std::move(out), [r, c](detail::Node& self) {
    std::size_t off = 0;
    for (auto& p : self.parents) {
      const std::size_t pc = p->shape.cols;
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < pc; ++j) p->grad[i * pc + j] += self.grad[i * c + off + j];
      off += pc;
    }
  });
}

inline Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count) {
  if (begin + count > a.rows()) {
    throw NumericError("slice_rows: rows [" + std::to_string(begin) + ", " +
                       std::to_string(begin + count) + ") out of " + to_string(a.shape()));
  }
  const std::size_t c = a.cols();
  std::vector<double> out(a.data().begin() + static_cast<std::ptrdiff_t>(begin * c),
                          a.data().begin() + static_cast<std::ptrdiff_t>((begin + count) * c));
  return detail::make_result({count, c}, "slice_rows", {a}, std::move(out),
                             [begin, c](detail::Node& self) {
                               detail::Node& x = *self.parents[0];
                               for (std::size_t i = 0; i < self.grad.size(); ++i)
                                 x.grad[begin * c + i] += self.grad[i];
                             });
}

// Row lookup: out.row(i) = a.row(index[i]).
inline Tensor gather_rows(const Tensor& a, std::span<const std::size_t> index) {
  const std::size_t c = a.cols();
  std::vector<double> out(index.size() * c);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= a.rows()) {
      throw NumericError("gather_rows: index " + std::to_string(index[i]) + " out of " +
                         to_string(a.shape()));
    }
    std::copy_n(a.data().begin() + static_cast<std::ptrdiff_t>(index[i] * c), c, out.begin() + static_cast<std::ptrdiff_t>(i * c));
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  return detail::make_result({idx.size(), c}, "gather_rows", {a}, std::move(out),
                             [idx, c](detail::Node& self) {
                               detail::Node& x = *self.parents[0];
                               for (std::size_t i = 0; i < idx.size(); ++i)
                                 for (std::size_t j = 0; j < c; ++j)
                                   x.grad[idx[i] * c + j] += self.grad[i * c + j];
                             });
}

// Sums rows of `a` into `out_rows` buckets: out.row(index[i]) += a.row(i).
inline Tensor scatter_rows(const Tensor& a, std::span<const std::size_t> index, std::size_t out_rows) {
  if (index.size() != a.rows()) {
    throw NumericError("scatter_rows: " + std::to_string(index.size()) + " indices for " +
                       to_string(a.shape()));
  }
  const std::size_t c = a.cols();
  std::vector<double> out(out_rows * c, 0.0);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= out_rows) {
      throw NumericError("scatter_rows: index " + std::to_string(index[i]) + " >= " +
                         std::to_string(out_rows));
    }
    for (std::size_t j = 0; j < c; ++j) out[index[i] * c + j] += a(i, j);
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  return detail::make_result({out_rows, c}, "scatter_rows", {a}, std::move(out),
                             [idx, c](detail::Node& self) {
                               detail::Node& x = *self.parents[0];
                               for (std::size_t i = 0; i < idx.size(); ++i)
                                 for (std::size_t j = 0; j < c; ++j)
                                   x.grad[i * c + j] += self.grad[idx[i] * c + j];
                             });
}

// (n x 1), (m x 1) -> (n x m) with out(i, j) = u(i) + v(j).
inline Tensor add_outer(const Tensor& u, const Tensor& v) {
  if (u.cols() != 1 || v.cols() != 1) {
    throw NumericError("add_outer: expects column vectors, got " + to_string(u.shape()) + " vs " +
                       to_string(v.shape()));
  }
  const std::size_t n = u.rows(), m = v.rows();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = u.data()[i] + v.data()[j];
  return detail::make_result({n, m}, "add_outer", {u, v}, std::move(out), [n, m](detail::Node& self) {
    detail::Node& x = *self.parents[0];
    detail::Node& y = *self.parents[1];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        x.grad[i] += self.grad[i * m + j];
        y.grad[j] += self.grad[i * m + j];
      }
  });
}

inline Tensor sigmoid(const Tensor& a) {
  return detail::unary(
      "sigmoid", a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

inline Tensor tanh(const Tensor& a) {
  return detail::unary("tanh", a, [](double x) { return std::tanh(x); },
                       [](double, double y) { return 1.0 - y * y; });
}

inline Tensor leaky_relu(const Tensor& a, double slope) {
  return detail::unary("leaky_relu", a, [slope](double x) { return x > 0 ? x : slope * x; },
                       [slope](double x, double) { return x > 0 ? 1.0 : slope; });
}

inline Tensor exp(const Tensor& a) {
  return detail::unary("exp", a, [](double x) { return std::exp(x); },
                       [](double, double y) { return y; });
}

// log(max(x, kLogEps)); the gradient is zero below the guard.
inline Tensor log(const Tensor& a) {
  return detail::unary("log", a, [](double x) { return std::log(std::max(x, kLogEps)); },
                       [](double x, double) { return x > kLogEps ? 1.0 / x : 0.0; });
}

// Elementwise minimum. The gradient goes to the smaller argument; ties go to `a`.
inline Tensor min(const Tensor& a, const Tensor& b) {
  detail::require_same_shape("min", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(a.data()[i], b.data()[i]);
  return detail::make_result(a.shape(), "min", {a, b}, std::move(out), [](detail::Node& self) {
    detail::Node& x = *self.parents[0];
    detail::Node& y = *self.parents[1];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (x.data[i] <= y.data[i]) {
        x.grad[i] += self.grad[i];
      } else {
        y.grad[i] += self.grad[i];
      }
    }
  });
}

// Sum of all entries -> 1x1.
inline Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return detail::make_result({1, 1}, "sum", {a}, {s}, [](detail::Node& self) {
    for (auto& g : self.parents[0]->grad) g += self.grad[0];
  });
}

// Column means over rows: (n x c) -> (1 x c).
inline Tensor mean_rows(const Tensor& a) {
  if (a.rows() == 0) throw NumericError("mean_rows: empty input " + to_string(a.shape()));
  const std::size_t n = a.rows(), c = a.cols();
  std::vector<double> out(c, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j] += a(i, j);
  for (auto& v : out) v /= static_cast<double>(n);
  return detail::make_result({1, c}, "mean_rows", {a}, std::move(out), [n, c](detail::Node& self) {
    detail::Node& x = *self.parents[0];
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) x.grad[i * c + j] += self.grad[j] * inv;
  });
}

// Single entry as a 1x1 tensor.
inline Tensor pick(const Tensor& a, std::size_t r, std::size_t c) {
  if (r >= a.rows() || c >= a.cols()) {
    throw NumericError("pick: (" + std::to_string(r) + "," + std::to_string(c) + ") out of " +
                       to_string(a.shape()));
  }
  const std::size_t at = r * a.cols() + c;
  return detail::make_result({1, 1}, "pick", {a}, {a.data()[at]}, [at](detail::Node& self) {
    self.parents[0]->grad[at] += self.grad[0];
  });
}

// Softmax along `axis` (1: across each row, 0: down each column). A mask, when
// given, has one entry per element; masked entries come out exactly 0 and every
// row (or column) must keep at least one valid entry.
inline Tensor softmax(const Tensor& a, int axis = 1,
                      std::optional<std::span<const std::uint8_t>> mask = std::nullopt) {
  if (axis != 0 && axis != 1) throw NumericError("softmax: axis must be 0 or 1");
  if (mask && mask->size() != a.size()) {
    throw NumericError("softmax: mask of " + std::to_string(mask->size()) + " entries for " +
                       to_string(a.shape()));
  }
  const std::size_t r = a.rows(), c = a.cols();
  const std::size_t lines = axis == 1 ? r : c;
  const std::size_t len = axis == 1 ? c : r;
  auto index = [=](std::size_t line, std::size_t k) { return axis == 1 ? line * c + k : k * c + line; };
  std::vector<double> out(a.size(), 0.0);
  std::vector<std::uint8_t> valid(a.size(), 1);
  if (mask) std::copy(mask->begin(), mask->end(), valid.begin());
  for (std::size_t line = 0; line < lines; ++line) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < len; ++k) {
      const auto at = index(line, k);
      if (valid[at]) mx = std::max(mx, a.data()[at]);
    }
    if (mx == -std::numeric_limits<double>::infinity()) {
      throw NumericError("softmax: fully masked " + std::string(axis == 1 ? "row " : "column ") +
                         std::to_string(line) + " of " + to_string(a.shape()));
    }
    double z = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const auto at = index(line, k);
      if (!valid[at]) continue;
      out[at] = std::exp(a.data()[at] - mx);
      z += out[at];
    }
    for (std::size_t k = 0; k < len; ++k) out[index(line, k)] /= z;
  }
  return detail::make_result(a.shape(), "softmax", {a}, std::move(out),
                             [lines, len, index](detail::Node& self) {
                               detail::Node& x = *self.parents[0];
                               for (std::size_t line = 0; line < lines; ++line) {
                                 double dot = 0.0;
                                 for (std::size_t k = 0; k < len; ++k) {
                                   const auto at = index(line, k);
                                   dot += self.data[at] * self.grad[at];
                                 }
                                 for (std::size_t k = 0; k < len; ++k) {
                                   const auto at = index(line, k);
                                   x.grad[at] += self.data[at] * (self.grad[at] - dot);
                                 }
                               }
                             });
}

// Accumulates d(loss)/d(node) into every node reachable from `loss`.
// Leaf gradients accumulate across calls; intermediate gradients are reset
// at the start of each call so repeated calls do not double count.
inline void backward(const Tensor& loss) {
  if (loss.size() != 1) throw NumericError("backward: loss must be 1x1, got " + to_string(loss.shape()));
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{loss.node(), 0}};
  seen.insert(loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* p = node->parents[next++].get();
      if (seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (auto* n : order) {
    if (!n->parents.empty()) std::fill(n->grad.begin(), n->grad.end(), 0.0);
  }
  loss.node()->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

}  // namespace qgen
