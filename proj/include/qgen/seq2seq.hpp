#pragma once

// Graph-to-sequence model: GAT encoder + copy/coverage decoder sharing one
// vocabulary. Source tokens outside the vocabulary get extended ids so the
// decoder can still copy them.

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qgen/decoder.hpp"
#include "qgen/encoder.hpp"
#include "qgen/error.hpp"
#include "qgen/graph.hpp"
#include "qgen/param_store.hpp"
#include "qgen/text.hpp"

namespace qgen {

struct ModelDims {
  std::size_t embed = 64;
  std::size_t model = 64;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t hidden = 64;
  std::size_t attn = 64;
};

struct SourceInput {
  Tokens tokens;
  Adjacency adj;
};

struct Seq2SeqExample {
  SourceInput source;
  Tokens target;
};

class Seq2SeqModel {
 public:
  Seq2SeqModel(Vocab vocab, ModelDims dims, std::uint64_t seed)
      : vocab_(std::move(vocab)), dims_(dims), params_(seed) {
    register_encoder_params(params_, "enc", encoder_config());
    register_decoder_params(params_, "dec", decoder_config());
  }

  const Vocab& vocab() const { return vocab_; }
  const ModelDims& dims() const { return dims_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  EncoderConfig encoder_config() const {
    return {vocab_.size(), dims_.embed, dims_.model, dims_.heads, dims_.layers, 0.2, Activation::tanh};
  }
  DecoderConfig decoder_config() const {
    return {vocab_.size(), dims_.embed, encoder_config().output_dim(), dims_.hidden, dims_.attn};
  }

  struct Encoded {
    AttentionMemory memory;
    Tensor pooled;
    Tokens oov;  // source words outside the vocabulary, by extended id - V
  };

  Encoded encode(const SourceInput& src) const {
    if (src.tokens.empty()) throw DataError("seq2seq: empty source");
    if (src.adj.n != src.tokens.size()) throw DataError("seq2seq: adjacency does not match source length");
    std::vector<std::size_t> ids, ext;
    Encoded e;
    for (const auto& t : src.tokens) {
      ids.push_back(vocab_.id(t));
      if (vocab_.contains(t)) {
        ext.push_back(vocab_.id(t));
        continue;
      }
      auto it = std::find(e.oov.begin(), e.oov.end(), t);
      if (it == e.oov.end()) {
        e.oov.push_back(t);
        it = e.oov.end() - 1;
      }
      ext.push_back(vocab_.size() + static_cast<std::size_t>(it - e.oov.begin()));
    }
    const auto out = encode_graph(ids, src.adj, params_, "enc", encoder_config());
    e.pooled = out.pooled;
    e.memory = make_memory(out.states(), decoder_params(), std::move(ext), vocab_.size() + e.oov.size());
    return e;
  }

  /// Extended ids of the target followed by eos.
  std::vector<std::size_t> target_ids(const Encoded& e, const Tokens& target) const {
    std::vector<std::size_t> ids;
    for (const auto& t : target) {
      if (vocab_.contains(t)) {
        ids.push_back(vocab_.id(t));
      } else if (auto it = std::find(e.oov.begin(), e.oov.end(), t); it != e.oov.end()) {
        ids.push_back(vocab_.size() + static_cast<std::size_t>(it - e.oov.begin()));
      } else {
        ids.push_back(vocab_.unk());
      }
    }
    ids.push_back(vocab_.eos());
    return ids;
  }

  Tensor loss(const Seq2SeqExample& ex, const SequenceLossOptions& opt, std::mt19937_64& rng) const {
    const Encoded e = encode(ex.source);
    return sequence_loss(e.memory, e.pooled, decoder_params(), target_ids(e, ex.target), vocab_.bos(), vocab_.unk(),
                         opt, rng);
  }

  Tokens generate(const SourceInput& src, std::size_t max_len, std::vector<DecodeTraceStep>* trace = nullptr) const {
    const Encoded e = encode(src);
    const auto ids =
        decode_greedy(e.memory, e.pooled, decoder_params(), max_len, vocab_.bos(), vocab_.eos(), vocab_.unk(), trace);
    Tokens out;
    for (auto id : ids) out.push_back(id < vocab_.size() ? vocab_.token(id) : e.oov[id - vocab_.size()]);
    return out;
  }

  DecoderParams decoder_params() const { return DecoderParams::from(params_, "dec", decoder_config()); }

  nlohmann::json to_json() const {
    return {{"kind", "seq2seq"},
            {"vocab", vocab_.tokens()},
            {"dims",
             {{"embed", dims_.embed},
              {"model", dims_.model},
              {"heads", dims_.heads},
              {"layers", dims_.layers},
              {"hidden", dims_.hidden},
              {"attn", dims_.attn}}},
            {"params", params_to_json(params_)}};
  }

  static Seq2SeqModel from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "seq2seq") throw DataError("seq2seq checkpoint: wrong kind");
    const auto& d = j.at("dims");
    ModelDims dims{d.at("embed"), d.at("model"), d.at("heads"), d.at("layers"), d.at("hidden"), d.at("attn")};
    Seq2SeqModel m(Vocab::from_list(j.at("vocab").get<std::vector<std::string>>()), dims, 0);
    ParamStore loaded = params_from_json(j.at("params"));
    for (const auto& [name, t] : m.params_.items()) {
      if (!loaded.contains(name)) throw DataError("seq2seq checkpoint: missing parameter " + name);
      if (loaded.at(name).shape() != t.shape()) throw DataError("seq2seq checkpoint: bad shape for " + name);
    }
    m.params_ = std::move(loaded);
    return m;
  }

 private:
  Vocab vocab_;
  ModelDims dims_;
  ParamStore params_;
};

/// Vocabulary over every source and target token plus the given specials.
inline Vocab seq2seq_vocab(const std::vector<Seq2SeqExample>& examples, const std::vector<std::string>& specials) {
  std::set<std::string> words;
  for (const auto& ex : examples) {
    words.insert(ex.source.tokens.begin(), ex.source.tokens.end());
    words.insert(ex.target.begin(), ex.target.end());
  }
  for (const auto& s : specials) words.erase(s);
  return Vocab::build(specials, words);
}

struct Seq2SeqTrainOptions {
  int epochs = 40;
  double lr = 2e-3;
  double clip_norm = 5.0;
  double lambda_cov = 1.0;
  int coverage_start_epoch = 5;  // coverage loss used from this 0-based epoch on
  double tf_floor = 0.5;
  int tf_decay_epochs = 20;
  std::uint64_t seed = 1;
};

struct Seq2SeqEpoch {
  int epoch = 0;
  double loss = 0.0;
  double teacher_forcing = 1.0;
  double lambda_cov = 0.0;
};

/// Batch size 1, shuffled each epoch.
inline std::vector<Seq2SeqEpoch> train_seq2seq(Seq2SeqModel& model, const std::vector<Seq2SeqExample>& data,
                                               const Seq2SeqTrainOptions& opt,
                                               const std::function<void(const Seq2SeqEpoch&)>& on_epoch = {}) {
  if (data.empty()) throw DataError("train_seq2seq: no training examples");
  Adam adam({.lr = opt.lr, .clip_norm = opt.clip_norm});
  std::mt19937_64 rng(opt.seed);
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<Seq2SeqEpoch> log;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    SequenceLossOptions lo;
    lo.teacher_forcing = teacher_forcing_prob(epoch, opt.tf_floor, opt.tf_decay_epochs);
    lo.lambda_cov = epoch >= opt.coverage_start_epoch ? opt.lambda_cov : 0.0;
    double total = 0.0;
    for (auto i : order) {
      const Tensor loss = model.loss(data[i], lo, rng);
      backward(loss);
      adam.step(model.params());
      total += loss.item();
    }
    log.push_back({epoch, total / static_cast<double>(data.size()), lo.teacher_forcing, lo.lambda_cov});
    if (on_epoch) on_epoch(log.back());
  }
  return log;
}

}  // namespace qgen
