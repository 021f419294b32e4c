#pragma once

// LSTM graph-to-sequence decoder with additive coverage attention, a copy
// gate, and the coverage loss.
//
// Per step t, given the previous token x_t:
//   s_t        = LSTM([x_t; h*_{t-1}; s_{t-1}])
//   e_i^t      = v^T tanh(W_h h_i + W_s s_t + w_c c_i^t + b)
//   alpha^t    = softmax(e^t),  h*_t = sum_i alpha_i^t h_i
//   p_vocab    = softmax(W_o [s_t; h*_t] + b_o)
//   p_copy     = sigmoid(w_h* h*_t + w_s s_t + w_x x_t + b_ptr)
//   P(w)       = (1 - p_copy) p_vocab(w) + p_copy sum_{i: src_i = w} alpha_i^t
//   covloss_t  = sum_i min(alpha_i^t, c_i^t),  c^{t+1} = c^t + alpha^t

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "qgen/error.hpp"
#include "qgen/param_store.hpp"
#include "qgen/tensor.hpp"

namespace qgen {

struct DecoderConfig {
  std::size_t vocab = 0;
  std::size_t embed_dim = 64;
  std::size_t enc_dim = 64;
  std::size_t hidden_dim = 64;
  std::size_t attn_dim = 64;
};

inline void register_decoder_params(ParamStore& store, const std::string& prefix, const DecoderConfig& c) {
  const auto E = c.embed_dim, D = c.enc_dim, H = c.hidden_dim, A = c.attn_dim, V = c.vocab;
  store.create(prefix + ".embed", V, E);
  store.create(prefix + ".init_h", H, D);
  store.create(prefix + ".init_hb", H, 1);
  store.create(prefix + ".init_c", H, D);
  store.create(prefix + ".init_cb", H, 1);
  store.create(prefix + ".lstm_W", 4 * H, E + D + H);
  store.create(prefix + ".lstm_b", 4 * H, 1);
  store.create(prefix + ".att_Wh", A, D);
  store.create(prefix + ".att_Ws", A, H);
  store.create(prefix + ".att_wc", 1, A);
  store.create(prefix + ".att_b", A, 1);
  store.create(prefix + ".att_v", A, 1);
  store.create(prefix + ".copy_wh", 1, D);
  store.create(prefix + ".copy_ws", 1, H);
  store.create(prefix + ".copy_wx", 1, E);
  store.create(prefix + ".copy_b", 1, 1);
  store.create(prefix + ".out_W", V, H + D);
  store.create(prefix + ".out_b", V, 1);
}

/// Handles to the decoder parameters inside a ParamStore (shared storage).
struct DecoderParams {
  DecoderConfig config;
  Tensor embed, init_h, init_hb, init_c, init_cb, lstm_W, lstm_b;
  Tensor att_Wh, att_Ws, att_wc, att_b, att_v;
  Tensor copy_wh, copy_ws, copy_wx, copy_b;
  Tensor out_W, out_b;

  static DecoderParams from(const ParamStore& s, const std::string& prefix, const DecoderConfig& c) {
    auto p = [&](const char* n) { return s.at(prefix + "." + n); };
    return {c,           p("embed"),  p("init_h"),  p("init_hb"), p("init_c"),  p("init_cb"), p("lstm_W"),
            p("lstm_b"), p("att_Wh"), p("att_Ws"),  p("att_wc"),  p("att_b"),   p("att_v"),   p("copy_wh"),
            p("copy_ws"), p("copy_wx"), p("copy_b"), p("out_W"),   p("out_b")};
  }
};

/// Encoder-side quantities reused at every step.
struct AttentionMemory {
  Tensor states;    // N x D
  Tensor states_t;  // D x N
  Tensor keys;      // N x A, rows W_h h_i
  Tensor ones;      // N x 1
  std::vector<std::size_t> source_ids;  // extended-vocabulary id per source token
  std::size_t extended_size = 0;

  std::size_t length() const { return states.rows(); }
};

inline AttentionMemory make_memory(const Tensor& states, const DecoderParams& p, std::vector<std::size_t> source_ids,
                                   std::size_t extended_size) {
  if (states.rows() == 0) throw NumericError("decoder: empty encoder states");
  if (source_ids.size() != states.rows()) throw NumericError("decoder: one source id per encoder state required");
  AttentionMemory m;
  m.states = states;
  m.states_t = transpose(states);
  m.keys = matmul(states, transpose(p.att_Wh));
  m.ones = Tensor::filled(states.rows(), 1, 1.0);
  m.source_ids = std::move(source_ids);
  m.extended_size = std::max(extended_size, p.config.vocab);
  return m;
}

struct AttentionResult {
  Tensor scores;   // e^t, N x 1
  Tensor alpha;    // N x 1
  Tensor context;  // h*_t, D x 1
};

inline AttentionResult attention_step(const AttentionMemory& m, const Tensor& s, const Tensor& coverage,
                                      const DecoderParams& p) {
  const Tensor query = transpose(add(matmul(p.att_Ws, s), p.att_b));  // 1 x A
  const Tensor pre = add(add(m.keys, matmul(m.ones, query)), matmul(coverage, p.att_wc));
  AttentionResult r;
  r.scores = matmul(tanh(pre), p.att_v);
  r.alpha = softmax(r.scores, 0);
  r.context = matmul(m.states_t, r.alpha);
  return r;
}

/// 1x1 probability of copying from the source.
inline Tensor copy_gate(const Tensor& context, const Tensor& s, const Tensor& x, const DecoderParams& p) {
  return sigmoid(add(add(add(matmul(p.copy_wh, context), matmul(p.copy_ws, s)), matmul(p.copy_wx, x)), p.copy_b));
}

/// Mixture of the vocabulary distribution (padded with zeros to the extended
/// size) and the attention mass scattered onto source token ids.
inline Tensor final_distribution(const Tensor& p_vocab, const Tensor& alpha, const Tensor& p_copy,
                                 const std::vector<std::size_t>& source_ids, std::size_t extended_size) {
  if (extended_size < p_vocab.rows()) throw NumericError("final_distribution: extended size below vocabulary size");
  Tensor padded = p_vocab;
  if (extended_size > p_vocab.rows()) {
    padded = concat_rows({p_vocab, Tensor::zeros(extended_size - p_vocab.rows(), 1)});
  }
  const Tensor gen = scale(padded, sub(Tensor::scalar(1.0), p_copy));
  const Tensor copy = scale(scatter_rows(alpha, source_ids, extended_size), p_copy);
  return add(gen, copy);
}

inline Tensor coverage_loss(const Tensor& alpha, const Tensor& coverage) { return sum(min(alpha, coverage)); }

struct DecoderState {
  Tensor hidden;   // s_t, H x 1
  Tensor cell;     // H x 1
  Tensor context;  // previous h*, D x 1
  Tensor coverage;  // c^t, N x 1
  std::size_t t = 0;
  std::vector<Tensor> attention_history;
  std::vector<std::size_t> emitted;
};

/// c^{t+1} = c^t + alpha^t, where alpha^t is the latest history entry.
inline void coverage_update(DecoderState& state) {
  if (state.attention_history.empty()) throw NumericError("coverage_update: no attention recorded");
  state.coverage = add(state.coverage, state.attention_history.back());
}

inline DecoderState initial_state(const AttentionMemory& m, const Tensor& pooled, const DecoderParams& p) {
  const Tensor mean = transpose(pooled);  // D x 1
  DecoderState st;
  st.hidden = tanh(add(matmul(p.init_h, mean), p.init_hb));
  st.cell = add(matmul(p.init_c, mean), p.init_cb);
  st.context = mean;
  st.coverage = Tensor::zeros(m.length(), 1);
  return st;
}

struct StepOutput {
  Tensor distribution;  // extended_size x 1
  Tensor alpha;
  Tensor p_copy;
  Tensor covloss;
};

/// Advances the state by one token and returns the output distribution.
inline StepOutput decoder_step(DecoderState& st, std::size_t prev_token, const AttentionMemory& m,
                               const DecoderParams& p) {
  const std::size_t H = p.config.hidden_dim;
  const std::vector<std::size_t> idx{prev_token < p.config.vocab ? prev_token : 0};
  const Tensor x = transpose(gather_rows(p.embed, idx));
  const Tensor gates = add(matmul(p.lstm_W, concat_rows({x, st.context, st.hidden})), p.lstm_b);
  const Tensor in = sigmoid(slice_rows(gates, 0, H));
  const Tensor forget = sigmoid(slice_rows(gates, H, H));
  const Tensor cand = tanh(slice_rows(gates, 2 * H, H));
  const Tensor out = sigmoid(slice_rows(gates, 3 * H, H));
  st.cell = add(mul(forget, st.cell), mul(in, cand));
  st.hidden = mul(out, tanh(st.cell));

  const AttentionResult att = attention_step(m, st.hidden, st.coverage, p);
  const Tensor p_vocab = softmax(add(matmul(p.out_W, concat_rows({st.hidden, att.context})), p.out_b), 0);
  StepOutput o;
  o.alpha = att.alpha;
  o.p_copy = copy_gate(att.context, st.hidden, x, p);
  o.distribution = final_distribution(p_vocab, att.alpha, o.p_copy, m.source_ids, m.extended_size);
  o.covloss = coverage_loss(att.alpha, st.coverage);
  st.context = att.context;
  st.attention_history.push_back(att.alpha);
  coverage_update(st);
  ++st.t;
  return o;
}

inline std::size_t argmax(const Tensor& column) {
  auto d = column.data();
  return static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
}

struct DecodeTraceStep {
  std::size_t token = 0;
  double p_copy = 0.0;
  std::vector<double> alpha;
};

/// Greedy decoding: the argmax token per step until eos or max_len tokens.
/// The returned ids exclude eos.
inline std::vector<std::size_t> decode_greedy(const AttentionMemory& m, const Tensor& pooled, const DecoderParams& p,
                                              std::size_t max_len, std::size_t bos, std::size_t eos,
                                              std::size_t unk, std::vector<DecodeTraceStep>* trace = nullptr) {
  if (max_len == 0) throw DataError("decode_greedy: max_len must be >= 1");
  DecoderState st = initial_state(m, pooled, p);
  std::size_t prev = bos;
  while (st.emitted.size() < max_len) {
    const StepOutput o = decoder_step(st, prev, m, p);
    const std::size_t tok = argmax(o.distribution);
    if (trace) {
      trace->push_back({tok, o.p_copy.item(), std::vector<double>(o.alpha.data().begin(), o.alpha.data().end())});
    }
    if (tok == eos) break;
    st.emitted.push_back(tok);
    prev = tok < p.config.vocab ? tok : unk;
  }
  return st.emitted;
}

struct SequenceLossOptions {
  double teacher_forcing = 1.0;  // probability of feeding the gold token
  double lambda_cov = 0.0;
};

/// Per-token average of -log P(gold_t) + lambda_cov * covloss_t. `target`
/// includes the closing eos. With teacher_forcing < 1 the next input is the
/// model's own argmax with probability 1 - teacher_forcing.
inline Tensor sequence_loss(const AttentionMemory& m, const Tensor& pooled, const DecoderParams& p,
                            const std::vector<std::size_t>& target, std::size_t bos, std::size_t unk,
                            const SequenceLossOptions& opt, std::mt19937_64& rng) {
  if (target.empty()) throw DataError("sequence_loss: empty target");
  if (opt.teacher_forcing < 0.0 || opt.teacher_forcing > 1.0) {
    throw DataError("sequence_loss: teacher forcing probability outside [0, 1]");
  }
  std::bernoulli_distribution use_gold(opt.teacher_forcing);
  DecoderState st = initial_state(m, pooled, p);
  std::vector<Tensor> terms;
  std::size_t prev = bos;
  for (std::size_t gold : target) {
    const StepOutput o = decoder_step(st, prev, m, p);
    Tensor term = scale(log(pick(o.distribution, gold, 0)), -1.0);
    if (opt.lambda_cov > 0.0) term = add(term, scale(o.covloss, opt.lambda_cov));
    terms.push_back(term);
    std::size_t next = gold;
    if (opt.teacher_forcing < 1.0 && !use_gold(rng)) next = argmax(o.distribution);
    prev = next < p.config.vocab ? next : unk;
  }
  return scale(sum(concat_rows(terms)), 1.0 / static_cast<double>(target.size()));
}

/// Linear decay from 1 to `floor` over `decay_epochs` epochs (0-based epoch).
inline double teacher_forcing_prob(int epoch, double floor = 0.5, int decay_epochs = 20) {
  if (decay_epochs <= 0) return floor;
  return std::max(floor, 1.0 - static_cast<double>(epoch) / static_cast<double>(decay_epochs));
}

}  // namespace qgen
