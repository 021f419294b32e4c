#pragma once

// Question-type distribution learning with a pseudo label for count recovery.
//
// Targets are counts l = (l_1..l_T) turned into (l_1, .., l_T, 1) / (S + 1).
// The distribution head is a (T+1)-way softmax over the pooled graph vector.
// A second T-way head is trained with cross entropy on the majority type;
// both share the encoder.

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qgen/corpus.hpp"
#include "qgen/encoder.hpp"
#include "qgen/error.hpp"
#include "qgen/graph.hpp"
#include "qgen/param_store.hpp"
#include "qgen/tensor.hpp"
#include "qgen/text.hpp"

namespace qgen {

inline constexpr double kPseudoEps = 1e-9;

struct TypeDistribution {
  std::vector<double> probs;  // T real types, then the pseudo slot

  std::size_t types() const { return probs.empty() ? 0 : probs.size() - 1; }
  double pseudo() const { return probs.back(); }
};

inline TypeDistribution append_pseudo_label(std::span<const int> counts) {
  long total = 1;
  for (int c : counts) {
    if (c < 0) throw DataError("append_pseudo_label: negative count");
    total += c;
  }
  TypeDistribution d;
  for (int c : counts) d.probs.push_back(static_cast<double>(c) / static_cast<double>(total));
  d.probs.push_back(1.0 / static_cast<double>(total));
  return d;
}

inline std::vector<int> recover_counts(const TypeDistribution& p) {
  if (p.probs.empty() || p.pseudo() <= kPseudoEps) throw NumericError("recover_counts: no pseudo mass");
  std::vector<int> n;
  for (std::size_t i = 0; i + 1 < p.probs.size(); ++i) {
    n.push_back(static_cast<int>(std::floor(p.probs[i] / p.pseudo() + 0.5)));
  }
  return n;
}

/// sum_i p_i log(p_i / q_i); terms with p_i = 0 are skipped, q_i floored at kLogEps.
inline double kl_loss(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw NumericError("kl_loss: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) s += p[i] * (std::log(p[i]) - std::log(std::max(q[i], kLogEps)));
  }
  return s;
}

inline double kl_loss(const TypeDistribution& p, const TypeDistribution& q) { return kl_loss(p.probs, q.probs); }

inline double ce_loss(std::size_t label, std::span<const double> y_hat) {
  if (label >= y_hat.size()) throw DataError("ce_loss: label out of range");
  return -std::log(std::max(y_hat[label], kLogEps));
}

inline double combined_loss(double kl, double ce, double gamma) {
  if (gamma < 0.0 || gamma > 1.0) throw DataError("combined_loss: gamma outside [0, 1]");
  return gamma * kl + (1.0 - gamma) * ce;
}

/// Index of the largest count, lowest index on ties.
inline std::size_t majority_type(std::span<const int> counts) {
  if (counts.empty()) throw DataError("majority_type: no types");
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

/// softmax(W h_c^T + b) as a column; h_c is 1 x m.
inline Tensor predict_distribution(const Tensor& h_c, const Tensor& W, const Tensor& b) {
  if (W.cols() != h_c.cols()) throw NumericError("predict_distribution: W expects width " + std::to_string(W.cols()));
  return softmax(add(matmul(W, transpose(h_c)), b), 0);
}

/// KL as a differentiable scalar: const - p . log(q).
inline Tensor kl_loss_tensor(std::span<const double> p, const Tensor& q) {
  double entropy_term = 0.0;
  for (double v : p)
    if (v > 0.0) entropy_term += v * std::log(v);
  const Tensor row = Tensor::from(1, p.size(), std::vector<double>(p.begin(), p.end()));
  return sub(Tensor::scalar(entropy_term), matmul(row, log(q)));
}

inline Tensor ce_loss_tensor(std::size_t label, const Tensor& y_hat) { return scale(log(pick(y_hat, label, 0)), -1.0); }

struct TypeDistConfig {
  EncoderConfig encoder;
  std::size_t types = kHcdTypes.size();
  double gamma = 0.7;
};

struct TypeDistEpoch {
  int epoch = 0;
  double loss = 0.0;
  double mean_kl = 0.0;
};

struct TypeDistTrainOptions {
  int epochs = 500;
  double lr = 1e-3;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
};

class TypeDistModel {
 public:
  static constexpr const char* kPrefix = "td";

  TypeDistModel(Vocab vocab, TypeDistConfig config, std::uint64_t seed)
      : vocab_(std::move(vocab)), config_(config), params_(seed) {
    if (config_.gamma < 0.0 || config_.gamma > 1.0) throw DataError("typedist: gamma outside [0, 1]");
    config_.encoder.vocab = vocab_.size();
    register_encoder_params(params_, kPrefix, config_.encoder);
    const auto m = config_.encoder.output_dim();
    params_.create("td.dist.W", config_.types + 1, m);
    params_.create("td.dist.b", config_.types + 1, 1);
    params_.create("td.cls.W", config_.types, m);
    params_.create("td.cls.b", config_.types, 1);
  }

  const Vocab& vocab() const { return vocab_; }
  const TypeDistConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  struct Forward {
    Tensor distribution;  // (T+1) x 1
    Tensor classes;       // T x 1
  };

  Forward forward(const ParsedParagraph& p) const {
    std::vector<std::size_t> ids;
    for (const auto& t : p.tokens) ids.push_back(vocab_.id(t));
    const auto enc = encode_graph(ids, adjacency(build_token_graph(p)), params_, kPrefix, config_.encoder);
    return {predict_distribution(enc.pooled, params_.at("td.dist.W"), params_.at("td.dist.b")),
            predict_distribution(enc.pooled, params_.at("td.cls.W"), params_.at("td.cls.b"))};
  }

  TypeDistribution predict(const ParsedParagraph& p) const {
    const Tensor dist = forward(p).distribution;
    return {std::vector<double>(dist.data().begin(), dist.data().end())};
  }

  /// gamma * KL(target || p_hat) + (1 - gamma) * CE(majority type).
  Tensor loss(const ParsedParagraph& p, double* kl_out = nullptr) const {
    const auto counts = p.hcd_counts();
    const auto target = append_pseudo_label(counts);
    const Forward f = forward(p);
    const Tensor kl = kl_loss_tensor(target.probs, f.distribution);
    if (kl_out) *kl_out = kl.item();
    const Tensor ce = ce_loss_tensor(majority_type(counts), f.classes);
    return add(scale(kl, config_.gamma), scale(ce, 1.0 - config_.gamma));
  }

  nlohmann::json to_json() const {
    const auto& e = config_.encoder;
    return {{"kind", "typedist"},
            {"vocab", vocab_.tokens()},
            {"config",
             {{"embed_dim", e.embed_dim},
              {"model_dim", e.model_dim},
              {"heads", e.heads},
              {"layers", e.layers},
              {"types", config_.types},
              {"gamma", config_.gamma}}},
            {"params", params_to_json(params_)}};
  }

  static TypeDistModel from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "typedist") throw DataError("typedist checkpoint: wrong kind");
    const auto& c = j.at("config");
    TypeDistConfig cfg;
    cfg.encoder.embed_dim = c.at("embed_dim");
    cfg.encoder.model_dim = c.at("model_dim");
    cfg.encoder.heads = c.at("heads");
    cfg.encoder.layers = c.at("layers");
    cfg.types = c.at("types");
    cfg.gamma = c.at("gamma");
    TypeDistModel m(Vocab::from_list(j.at("vocab").get<std::vector<std::string>>()), cfg, 0);
    m.params_ = params_from_json(j.at("params"));
    return m;
  }

 private:
  Vocab vocab_;
  TypeDistConfig config_;
  ParamStore params_;
};

inline Vocab paragraph_vocab(const Corpus& c) {
  std::set<std::string> words;
  for (const auto& p : c.paragraphs) words.insert(p.tokens.begin(), p.tokens.end());
  return Vocab::build({}, words);
}

/// One example per paragraph per epoch, shuffled with the seed; logs the
/// mean loss and the mean KL of each epoch.
inline std::vector<TypeDistEpoch> train_typedist(TypeDistModel& model, const Corpus& corpus,
                                                 const TypeDistTrainOptions& opt) {
  if (corpus.paragraphs.empty()) throw DataError("train_typedist: empty corpus");
  Adam adam({.lr = opt.lr, .clip_norm = opt.clip_norm});
  std::mt19937_64 rng(opt.seed);
  std::vector<std::size_t> order(corpus.paragraphs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<TypeDistEpoch> log;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0, kl_sum = 0.0;
    for (auto i : order) {
      double kl = 0.0;
      const Tensor loss = model.loss(corpus.paragraphs[i], &kl);
      backward(loss);
      adam.step(model.params());
      loss_sum += loss.item();
      kl_sum += kl;
    }
    const auto n = static_cast<double>(order.size());
    log.push_back({epoch, loss_sum / n, kl_sum / n});
  }
  return log;
}

/// Mean KL over paragraphs of the current model (no training).
inline double mean_train_kl(const TypeDistModel& model, const Corpus& corpus) {
  double s = 0.0;
  for (const auto& p : corpus.paragraphs) {
    const auto counts = p.hcd_counts();
    s += kl_loss(append_pseudo_label(counts), model.predict(p));
  }
  return corpus.paragraphs.empty() ? 0.0 : s / static_cast<double>(corpus.paragraphs.size());
}

}  // namespace qgen
