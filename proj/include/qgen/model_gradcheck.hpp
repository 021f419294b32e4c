#pragma once

// Gradient-check cases for whole model pieces, added on top of the per-op
// registry: one GAT layer and one full decoder step.

#include <random>
#include <string>
#include <vector>

#include "qgen/decoder.hpp"
#include "qgen/encoder.hpp"
#include "qgen/gradcheck.hpp"
#include "qgen/graph.hpp"

namespace qgen {

inline GradCase gat_layer_case(std::mt19937_64& rng) {
  const std::size_t n = 5, in = 4, heads = 2, dh = 3;
  Adjacency adj = self_loops(n);
  std::bernoulli_distribution coin(0.4);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) adj.connect(i, j);
  GatLayerParams p;
  p.slope = 0.2;
  for (std::size_t k = 0; k < heads; ++k) {
    p.W.push_back(gradcheck_detail::random_tensor(rng, dh, in));
    p.a.push_back(gradcheck_detail::random_tensor(rng, 2 * dh, 1));
  }
  const Tensor h = gradcheck_detail::random_tensor(rng, n, in);
  const Tensor w = gradcheck_detail::random_tensor(rng, n, heads * dh);
  std::vector<Tensor> inputs{h};
  inputs.insert(inputs.end(), p.W.begin(), p.W.end());
  inputs.insert(inputs.end(), p.a.begin(), p.a.end());
  return {inputs, [=] { return gradcheck_detail::weighted_sum(gat_layer(h, p, adj), w); }};
}

/// One decoder step from a random mid-sequence state (nonzero coverage),
/// scored by -log P(gold) + covloss; one source word is out of vocabulary.
inline GradCase decoder_step_case(std::mt19937_64& rng) {
  DecoderConfig cfg{6, 3, 4, 3, 3};
  ParamStore store(rng());
  register_decoder_params(store, "d", cfg);
  const DecoderParams p = DecoderParams::from(store, "d", cfg);
  const std::size_t n = 4;
  const Tensor states = gradcheck_detail::random_tensor(rng, n, cfg.enc_dim);
  const Tensor pooled = gradcheck_detail::random_tensor(rng, 1, cfg.enc_dim);
  const Tensor hidden = gradcheck_detail::random_tensor(rng, cfg.hidden_dim, 1);
  const Tensor cell = gradcheck_detail::random_tensor(rng, cfg.hidden_dim, 1);
  const Tensor context = gradcheck_detail::random_tensor(rng, cfg.enc_dim, 1);
  // Coverage after a few steps; the entries sit well away from alpha = 1/n.
  std::vector<double> cov(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& c : cov) c = u(rng) < 0.5 ? 0.02 + 0.1 * u(rng) : 0.6 + 1.5 * u(rng);
  const Tensor coverage = Tensor::column(cov);
  std::vector<std::size_t> src{1, 4, cfg.vocab, 4};
  const std::size_t prev = std::uniform_int_distribution<std::size_t>(0, cfg.vocab - 1)(rng);
  const std::size_t gold = std::uniform_int_distribution<std::size_t>(0, cfg.vocab)(rng);

  std::vector<Tensor> inputs{states, hidden, cell, context, coverage};
  for (auto& [name, t] : store.items()) {
    (void)name;
    inputs.push_back(t);
  }
  auto loss = [=] {
    const AttentionMemory m = make_memory(states, p, src, cfg.vocab + 1);
    DecoderState st = initial_state(m, pooled, p);
    st.hidden = hidden;
    st.cell = cell;
    st.context = context;
    st.coverage = coverage;
    const StepOutput o = decoder_step(st, prev, m, p);
    return add(scale(log(pick(o.distribution, gold, 0)), -1.0), o.covloss);
  };
  return {inputs, loss};
}

inline GradCheckRegistry full_registry() {
  GradCheckRegistry reg = op_registry();
  reg.add("gat_layer", gat_layer_case);
  reg.add("decoder_step", decoder_step_case);
  return reg;
}

}  // namespace qgen
