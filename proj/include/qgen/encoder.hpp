#pragma once

// Multi-head graph attention encoder over a TokenGraph.
//
//   alpha_ij = softmax_{j in N(i)} LeakyReLU(a^T [W h_i || W h_j])
//   h'_i     = concat_k sigma(sum_j alpha^k_ij W^k h_j)

#include <string>
#include <vector>

#include "qgen/error.hpp"
#include "qgen/graph.hpp"
#include "qgen/param_store.hpp"
#include "qgen/tensor.hpp"

namespace qgen {

enum class Activation { tanh, identity };

struct EncoderConfig {
  std::size_t vocab = 0;
  std::size_t embed_dim = 64;
  std::size_t model_dim = 64;
  std::size_t heads = 4;
  std::size_t layers = 2;
  double slope = 0.2;
  Activation sigma = Activation::tanh;

  // Width of the final states.
  std::size_t output_dim() const { return layers == 0 ? embed_dim : model_dim; }
};

struct GatLayerParams {
  std::vector<Tensor> W;  // per head: (model_dim / heads) x in_dim
  std::vector<Tensor> a;  // per head: (2 * model_dim / heads) x 1
  double slope = 0.2;
  Activation sigma = Activation::tanh;

  std::size_t heads() const { return W.size(); }
};

struct EncoderOutput {
  std::vector<Tensor> layers;  // layers[0] = embeddings, layers[l] = output of GAT layer l
  Tensor pooled;               // 1 x output_dim

  const Tensor& states() const { return layers.back(); }
};

inline std::string gat_param_name(const std::string& prefix, std::size_t layer, std::size_t head, char what) {
  return prefix + ".gat" + std::to_string(layer) + ".h" + std::to_string(head) + "." + what;
}

inline void register_encoder_params(ParamStore& store, const std::string& prefix, const EncoderConfig& cfg) {
  if (cfg.heads == 0) throw DataError("encoder: heads must be >= 1");
  if (cfg.model_dim % cfg.heads != 0) throw DataError("encoder: model_dim must be divisible by heads");
  store.create(prefix + ".embed", cfg.vocab, cfg.embed_dim);
  const std::size_t dh = cfg.model_dim / cfg.heads;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::size_t in = l == 0 ? cfg.embed_dim : cfg.model_dim;
    for (std::size_t k = 0; k < cfg.heads; ++k) {
      store.create(gat_param_name(prefix, l, k, 'W'), dh, in);
      store.create(gat_param_name(prefix, l, k, 'a'), 2 * dh, 1);
    }
  }
}

inline GatLayerParams gat_layer_params(const ParamStore& store, const std::string& prefix, std::size_t layer,
                                       const EncoderConfig& cfg) {
  GatLayerParams p;
  p.slope = cfg.slope;
  p.sigma = cfg.sigma;
  for (std::size_t k = 0; k < cfg.heads; ++k) {
    p.W.push_back(store.at(gat_param_name(prefix, layer, k, 'W')));
    p.a.push_back(store.at(gat_param_name(prefix, layer, k, 'a')));
  }
  return p;
}

namespace encoder_detail {

inline void check_adjacency(const Tensor& h, const Adjacency& adj) {
  if (adj.n != h.rows()) {
    throw NumericError("gat: adjacency over " + std::to_string(adj.n) + " nodes for states " + to_string(h.shape()));
  }
  for (std::size_t i = 0; i < adj.n; ++i) {
    if (!adj(i, i)) throw NumericError("gat: node " + std::to_string(i) + " has no self-loop");
  }
}

// Projected states Z = h W^T for one head.
inline Tensor project(const Tensor& h, const GatLayerParams& p, std::size_t k) { return matmul(h, transpose(p.W[k])); }

inline Tensor attention_from_projection(const Tensor& z, const GatLayerParams& p, std::size_t k, const Adjacency& adj) {
  const std::size_t dh = z.cols();
  const Tensor src = matmul(z, slice_rows(p.a[k], 0, dh));   // N x 1, a_1^T W h_i
  const Tensor dst = matmul(z, slice_rows(p.a[k], dh, dh));  // N x 1, a_2^T W h_j
  return softmax(leaky_relu(add_outer(src, dst), p.slope), 1, std::span<const std::uint8_t>(adj.mask));
}

}  // namespace encoder_detail

/// N x N attention of head k: row i holds alpha_ij over the neighbours of i.
inline Tensor gat_attention(const Tensor& h, const GatLayerParams& p, const Adjacency& adj, std::size_t k) {
  encoder_detail::check_adjacency(h, adj);
  return encoder_detail::attention_from_projection(encoder_detail::project(h, p, k), p, k, adj);
}

inline Tensor gat_layer(const Tensor& h, const GatLayerParams& p, const Adjacency& adj) {
  encoder_detail::check_adjacency(h, adj);
  std::vector<Tensor> heads;
  for (std::size_t k = 0; k < p.heads(); ++k) {
    const Tensor z = encoder_detail::project(h, p, k);
    const Tensor mixed = matmul(encoder_detail::attention_from_projection(z, p, k, adj), z);
    heads.push_back(p.sigma == Activation::tanh ? tanh(mixed) : mixed);
  }
  return heads.size() == 1 ? heads[0] : concat_cols(heads);
}

/// Mean over node rows; stands in for a class-token vector.
inline Tensor pool_class_vector(const Tensor& states) { return mean_rows(states); }

inline EncoderOutput encode_graph(const std::vector<std::size_t>& ids, const Adjacency& adj, const ParamStore& store,
                                  const std::string& prefix, const EncoderConfig& cfg) {
  if (ids.empty()) throw DataError("encode_graph: empty token sequence");
  EncoderOutput out;
  out.layers.push_back(gather_rows(store.at(prefix + ".embed"), ids));
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    out.layers.push_back(gat_layer(out.layers.back(), gat_layer_params(store, prefix, l, cfg), adj));
  }
  out.pooled = pool_class_vector(out.states());
  return out;
}

}  // namespace qgen
