#pragma once

// Central finite-difference gradient checking and the registry of checked ops.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qgen/error.hpp"
#include "qgen/tensor.hpp"

namespace qgen {

/// One randomized instance: the leaves to perturb and a closure that rebuilds
/// the scalar loss from their current values.
struct GradCase {
  std::vector<Tensor> inputs;
  std::function<Tensor()> loss;
};

using GradCaseBuilder = std::function<GradCase(std::mt19937_64&)>;

/// Per trial, compares the analytic gradient over all input entries with the
/// central difference (f(x+eps) - f(x-eps)) / 2eps and scores
///   |analytic - fd| / max(|fd|, 1e-8)
/// using Euclidean norms over the stacked entries. Returns the max over trials.
inline double grad_check(const GradCaseBuilder& build, int trials, double eps, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    GradCase c = build(rng);
    for (auto& t : c.inputs) t.zero_grad();
    Tensor loss = c.loss();
    backward(loss);
    double diff2 = 0.0, fd2 = 0.0;
    for (auto& t : c.inputs) {
      auto data = t.data();
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double saved = data[i];
        data[i] = saved + eps;
        const double up = c.loss().item();
        data[i] = saved - eps;
        const double down = c.loss().item();
        data[i] = saved;
        const double fd = (up - down) / (2.0 * eps);
        const double d = t.grad()[i] - fd;
        diff2 += d * d;
        fd2 += fd * fd;
      }
    }
    const double err = std::sqrt(diff2) / std::max(std::sqrt(fd2), 1e-8);
    if (!std::isfinite(err)) return err;
    worst = std::max(worst, err);
  }
  return worst;
}

struct GradCheckRow {
  std::string name;
  double max_error = 0.0;
  bool passed = false;
};

class GradCheckRegistry {
 public:
  void add(std::string name, GradCaseBuilder builder) {
    entries_.emplace_back(std::move(name), std::move(builder));
  }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, GradCaseBuilder>>& entries() const { return entries_; }

  std::vector<GradCheckRow> run(int trials, double eps, double tolerance) const {
    if (entries_.empty()) throw NumericError("gradcheck: registry is empty");
    std::vector<GradCheckRow> rows;
    for (const auto& [name, builder] : entries_) {
      const double err = grad_check(builder, trials, eps);
      rows.push_back({name, err, std::isfinite(err) && err < tolerance});
    }
    return rows;
  }

 private:
  std::vector<std::pair<std::string, GradCaseBuilder>> entries_;
};

namespace gradcheck_detail {

inline Tensor random_tensor(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(r * c);
  for (auto& x : v) x = d(rng);
  return Tensor::from(r, c, std::move(v));
}

// Values bounded away from 0 so kinks are not straddled by the difference.
inline Tensor away_from_zero(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::uniform_real_distribution<double> mag(0.05, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> v(r * c);
  for (auto& x : v) x = sign(rng) ? mag(rng) : -mag(rng);
  return Tensor::from(r, c, std::move(v));
}

// Random weights turn every op output into a scalar with a generic gradient.
inline Tensor weighted_sum(const Tensor& t, const Tensor& w) { return sum(mul(t, w)); }

}  // namespace gradcheck_detail

/// Every differentiable op of the tensor core, each under a random weighted-sum loss.
inline GradCheckRegistry op_registry() {
  using namespace gradcheck_detail;
  GradCheckRegistry reg;
  reg.add("matmul", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 3, 4), b = random_tensor(rng, 4, 2), w = random_tensor(rng, 3, 2);
    return GradCase{{a, b}, [=] { return weighted_sum(matmul(a, b), w); }};
  });
  reg.add("add", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 3, 2), b = random_tensor(rng, 3, 2), w = random_tensor(rng, 3, 2);
    return GradCase{{a, b}, [=] { return weighted_sum(add(a, b), w); }};
  });
  reg.add("sub", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 2, 3), b = random_tensor(rng, 2, 3), w = random_tensor(rng, 2, 3);
    return GradCase{{a, b}, [=] { return weighted_sum(sub(a, b), w); }};
  });
  reg.add("mul", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 3, 2), b = random_tensor(rng, 3, 2), w = random_tensor(rng, 3, 2);
    return GradCase{{a, b}, [=] { return weighted_sum(mul(a, b), w); }};
  });
  reg.add("scale", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 3, 3), w = random_tensor(rng, 3, 3);
    return GradCase{{a}, [=] { return weighted_sum(scale(a, -1.7), w); }};
  });
  reg.add("scale_by", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 3, 2), s = random_tensor(rng, 1, 1), w = random_tensor(rng, 3, 2);
    return GradCase{{a, s}, [=] { return weighted_sum(scale(a, s), w); }};
  });
  reg.add("transpose", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 2, 4), w = random_tensor(rng, 4, 2);
    return GradCase{{a}, [=] { return weighted_sum(transpose(a), w); }};
  });
  reg.add("concat_rows", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 2, 3), b = random_tensor(rng, 1, 3), w = random_tensor(rng, 3, 3);
    return GradCase{{a, b}, [=] { return weighted_sum(concat_rows({a, b}), w); }};
  });
  reg.add("concat_cols", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 3, 2), b = random_tensor(rng, 3, 1), w = random_tensor(rng, 3, 3);
    return GradCase{{a, b}, [=] { return weighted_sum(concat_cols({a, b}), w); }};
  });
  reg.add("slice_rows", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 5, 2), w = random_tensor(rng, 2, 2);
    return GradCase{{a}, [=] { return weighted_sum(slice_rows(a, 2, 2), w); }};
  });
  reg.add("gather_rows", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 4, 3), w = random_tensor(rng, 5, 3);
    return GradCase{{a}, [=] {
                      const std::vector<std::size_t> idx{3, 0, 3, 1, 2};
                      return weighted_sum(gather_rows(a, idx), w);
                    }};
  });
  reg.add("scatter_rows", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 4, 1), w = random_tensor(rng, 3, 1);
    return GradCase{{a}, [=] {
                      const std::vector<std::size_t> idx{2, 0, 2, 1};
                      return weighted_sum(scatter_rows(a, idx, 3), w);
                    }};
  });
  reg.add("add_outer", [](std::mt19937_64& rng) {
    auto u = random_tensor(rng, 3, 1), v = random_tensor(rng, 4, 1), w = random_tensor(rng, 3, 4);
    return GradCase{{u, v}, [=] { return weighted_sum(add_outer(u, v), w); }};
  });
  reg.add("sigmoid", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 3, 3, -3, 3), w = random_tensor(rng, 3, 3);
    return GradCase{{a}, [=] { return weighted_sum(sigmoid(a), w); }};
  });
  reg.add("tanh", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 3, 3, -2, 2), w = random_tensor(rng, 3, 3);
    return GradCase{{a}, [=] { return weighted_sum(tanh(a), w); }};
  });
  reg.add("leaky_relu", [](std::mt19937_64& rng) {
    auto a = away_from_zero(rng, 3, 3), w = random_tensor(rng, 3, 3);
    return GradCase{{a}, [=] { return weighted_sum(leaky_relu(a, 0.2), w); }};
  });
  reg.add("exp", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 2, 3), w = random_tensor(rng, 2, 3);
    return GradCase{{a}, [=] { return weighted_sum(exp(a), w); }};
  });
  reg.add("log", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 2, 3, 0.1, 2.0), w = random_tensor(rng, 2, 3);
    return GradCase{{a}, [=] { return weighted_sum(log(a), w); }};
  });
  reg.add("min", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 3, 2);
    auto gap = away_from_zero(rng, 3, 2);
    std::vector<double> bv(a.size());
    for (std::size_t i = 0; i < bv.size(); ++i) bv[i] = a.data()[i] + gap.data()[i];
    auto b = Tensor::from(3, 2, bv);
    auto w = random_tensor(rng, 3, 2);
    return GradCase{{a, b}, [=] { return weighted_sum(min(a, b), w); }};
  });
  reg.add("sum", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 3, 2);
    return GradCase{{a}, [=] { return scale(sum(a), 1.3); }};
  });
  reg.add("mean_rows", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 4, 3), w = random_tensor(rng, 1, 3);
    return GradCase{{a}, [=] { return weighted_sum(mean_rows(a), w); }};
  });
  reg.add("pick", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 3, 3);
    return GradCase{{a}, [=] { return mul(pick(a, 1, 2), pick(a, 0, 0)); }};
  });
  reg.add("softmax_rows", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 3, 4, -2, 2), w = random_tensor(rng, 3, 4);
    return GradCase{{a}, [=] { return weighted_sum(softmax(a, 1), w); }};
  });
  reg.add("softmax_cols_masked", [](std::mt19937_64& rng) {
    auto a = random_tensor(rng, 4, 3, -2, 2), w = random_tensor(rng, 4, 3);
    return GradCase{{a}, [=] {
                      static const std::vector<std::uint8_t> mask{1, 0, 1, 1, 1, 0, 0, 1, 1, 1, 1, 0};
                      return weighted_sum(softmax(a, 0, std::span<const std::uint8_t>(mask)), w);
                    }};
  });
  return reg;
}

}  // namespace qgen
