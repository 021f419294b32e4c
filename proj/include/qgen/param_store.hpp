#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qgen/error.hpp"
#include "qgen/tensor.hpp"

namespace qgen {

/// Named parameters of one model. Initial values depend only on the seed and
/// the parameter name, so registration order does not matter.
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Registers `name` with uniform(-r, r) values, r = sqrt(6 / (fan_in + fan_out)),
  /// where fan_in = cols and fan_out = rows.
  Tensor& create(const std::string& name, std::size_t rows, std::size_t cols) {
    if (params_.contains(name)) throw DataError("ParamStore: duplicate parameter " + name);
    const double r = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(name_hash(name)),
                      static_cast<std::uint32_t>(name_hash(name) >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> dist(-r, r);
    std::vector<double> values(rows * cols);
    for (auto& v : values) v = dist(rng);
    return params_.emplace(name, Tensor::from(rows, cols, std::move(values))).first->second;
  }

  Tensor& insert(const std::string& name, Tensor value) {
    if (params_.contains(name)) throw DataError("ParamStore: duplicate parameter " + name);
    return params_.emplace(name, std::move(value)).first->second;
  }

  bool contains(const std::string& name) const { return params_.contains(name); }

  const Tensor& at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw DataError("ParamStore: missing parameter " + name);
    return it->second;
  }
  Tensor& at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw DataError("ParamStore: missing parameter " + name);
    return it->second;
  }

  const std::map<std::string, Tensor>& items() const { return params_; }
  std::map<std::string, Tensor>& items() { return params_; }

  void zero_grad() {
    for (auto& [_, t] : params_) t.zero_grad();
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& [_, t] : params_) n += t.size();
    return n;
  }

 private:
  static std::uint64_t name_hash(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return h;
  }

  std::uint64_t seed_;
  std::map<std::string, Tensor> params_;
};

// Checkpoint layout: {"seed": n, "params": [{"name", "shape": [r, c], "values": [...]}]}.
// nlohmann/json prints doubles in shortest round-trip form, so reload is exact.
inline nlohmann::json params_to_json(const ParamStore& store) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& [name, t] : store.items()) {
    params.push_back({{"name", name},
                      {"shape", {t.rows(), t.cols()}},
                      {"values", std::vector<double>(t.data().begin(), t.data().end())}});
  }
  return {{"seed", store.seed()}, {"params", std::move(params)}};
}

inline ParamStore params_from_json(const nlohmann::json& j) {
  try {
    ParamStore store(j.at("seed").get<std::uint64_t>());
    for (const auto& p : j.at("params")) {
      const auto rows = p.at("shape").at(0).get<std::size_t>();
      const auto cols = p.at("shape").at(1).get<std::size_t>();
      store.insert(p.at("name").get<std::string>(),
                   Tensor::from(rows, cols, p.at("values").get<std::vector<double>>()));
    }
    return store;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const NumericError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump() << '\n';
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Rescale the global gradient norm to at most this value; 0 disables.
  double clip_norm = 0.0;
};

/// Adam with bias correction. Moment estimates are keyed by parameter name.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  long steps() const { return t_; }

  /// Applies one update from the accumulated gradients, then zeroes them.
  /// Throws NumericError naming the first parameter with a non-finite gradient.
  void step(ParamStore& store) {
    double norm2 = 0.0;
    for (auto& [name, p] : store.items()) {
      for (double g : p.grad()) {
        if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient in " + name);
        norm2 += g * g;
      }
    }
    double factor = 1.0;
    if (config_.clip_norm > 0.0 && norm2 > config_.clip_norm * config_.clip_norm) {
      factor = config_.clip_norm / std::sqrt(norm2);
    }
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (auto& [name, p] : store.items()) {
      auto& m = first_[name];
      auto& v = second_[name];
      if (m.size() != p.size()) {
        m.assign(p.size(), 0.0);
        v.assign(p.size(), 0.0);
      }
      auto data = p.data();
      auto grad = p.grad();
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double g = grad[i] * factor;
        m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
        v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
        data[i] -= config_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.eps);
      }
      p.zero_grad();
    }
  }

 private:
  AdamConfig config_;
  long t_ = 0;
  std::map<std::string, std::vector<double>> first_;
  std::map<std::string, std::vector<double>> second_;
};

}  // namespace qgen
