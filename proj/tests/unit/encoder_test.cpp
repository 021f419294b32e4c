#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "qgen/encoder.hpp"
#include "qgen/gradcheck.hpp"
#include "qgen/model_gradcheck.hpp"

using namespace qgen;

namespace {

GatLayerParams random_layer(std::mt19937_64& rng, std::size_t heads, std::size_t dh, std::size_t in, Activation s) {
  GatLayerParams p;
  p.sigma = s;
  for (std::size_t k = 0; k < heads; ++k) {
    p.W.push_back(gradcheck_detail::random_tensor(rng, dh, in));
    p.a.push_back(gradcheck_detail::random_tensor(rng, 2 * dh, 1));
  }
  return p;
}

Adjacency random_adjacency(std::mt19937_64& rng, std::size_t n) {
  Adjacency a = self_loops(n);
  std::bernoulli_distribution coin(0.4);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) a.connect(i, j);
  return a;
}

// Plain-loop reference for one head: dense scores, masked softmax by hand.
std::vector<std::vector<double>> oracle_attention(const Tensor& h, const Tensor& W, const Tensor& a, double slope,
                                                  const Adjacency& adj) {
  const std::size_t n = h.rows(), dh = W.rows(), in = W.cols();
  std::vector<std::vector<double>> z(n, std::vector<double>(dh, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < dh; ++r)
      for (std::size_t c = 0; c < in; ++c) z[i][r] += W(r, c) * h(i, c);
  std::vector<std::vector<double>> alpha(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (!adj(i, j)) continue;
      double s = 0.0;
      for (std::size_t r = 0; r < dh; ++r) s += a(r, 0) * z[i][r] + a(dh + r, 0) * z[j][r];
      s = s > 0 ? s : slope * s;
      e[j] = std::exp(s);
      total += e[j];
    }
    for (std::size_t j = 0; j < n; ++j) alpha[i][j] = e[j] / total;
  }
  return alpha;
}

}  // namespace

TEST(GatAttention, SingleNodeIsOne) {
  std::mt19937_64 rng(1);
  const auto p = random_layer(rng, 1, 2, 3, Activation::tanh);
  const Tensor alpha = gat_attention(gradcheck_detail::random_tensor(rng, 1, 3), p, self_loops(1), 0);
  EXPECT_EQ(alpha(0, 0), 1.0);
}

TEST(GatAttention, IdenticalNeighboursSplitEvenly) {
  std::mt19937_64 rng(2);
  const auto p = random_layer(rng, 1, 2, 3, Activation::tanh);
  Tensor h = gradcheck_detail::random_tensor(rng, 3, 3);
  for (std::size_t c = 0; c < 3; ++c) h(2, c) = h(1, c);
  Adjacency adj = self_loops(3);
  adj.connect(0, 1);
  adj.connect(0, 2);
  const Tensor alpha = gat_attention(h, p, adj, 0);
  EXPECT_NEAR(alpha(0, 1), alpha(0, 2), 1e-15);
  EXPECT_NEAR(alpha(1, 0) + alpha(1, 1), 1.0, 1e-15);
}

TEST(GatAttention, MissingSelfLoopIsAnError) {
  std::mt19937_64 rng(3);
  const auto p = random_layer(rng, 1, 2, 3, Activation::tanh);
  Adjacency adj = self_loops(2);
  adj.mask[3] = 0;
  EXPECT_THROW(gat_attention(gradcheck_detail::random_tensor(rng, 2, 3), p, adj, 0), NumericError);
  EXPECT_THROW(gat_attention(gradcheck_detail::random_tensor(rng, 3, 3), p, self_loops(2), 0), NumericError);
}

TEST(GatAttention, MatchesDenseOracleAndRowsSumToOne) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    const auto p = random_layer(rng, 2, 3, 4, Activation::tanh);
    const Tensor h = gradcheck_detail::random_tensor(rng, n, 4);
    const Adjacency adj = random_adjacency(rng, n);
    for (std::size_t k = 0; k < 2; ++k) {
      const Tensor alpha = gat_attention(h, p, adj, k);
      const auto want = oracle_attention(h, p.W[k], p.a[k], p.slope, adj);
      for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (!adj(i, j)) ASSERT_EQ(alpha(i, j), 0.0);
          ASSERT_NEAR(alpha(i, j), want[i][j], 1e-12);
          row += alpha(i, j);
        }
        ASSERT_NEAR(row, 1.0, 1e-9);
      }
    }
  }
}

TEST(GatLayer, SingleNodeIdentityIsConcatOfProjections) {
  std::mt19937_64 rng(5);
  const auto p = random_layer(rng, 2, 2, 3, Activation::identity);
  const Tensor h = gradcheck_detail::random_tensor(rng, 1, 3);
  const Tensor out = gat_layer(h, p, self_loops(1));
  ASSERT_EQ(out.cols(), 4u);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t r = 0; r < 2; ++r) {
      double want = 0.0;
      for (std::size_t c = 0; c < 3; ++c) want += p.W[k](r, c) * h(0, c);
      EXPECT_NEAR(out(0, k * 2 + r), want, 1e-14);
    }
}

TEST(GatLayer, PathGraphMatchesHandComputation) {
  std::mt19937_64 rng(6);
  for (std::size_t heads : {1u, 3u}) {
    const auto p = random_layer(rng, heads, 2, 3, Activation::tanh);
    const Tensor h = gradcheck_detail::random_tensor(rng, 3, 3);
    Adjacency adj = self_loops(3);
    adj.connect(0, 1);
    adj.connect(1, 2);
    const Tensor out = gat_layer(h, p, adj);
    ASSERT_EQ(out.cols(), heads * 2);
    for (std::size_t k = 0; k < heads; ++k) {
      const auto alpha = oracle_attention(h, p.W[k], p.a[k], p.slope, adj);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t r = 0; r < 2; ++r) {
          double acc = 0.0;
          for (std::size_t j = 0; j < 3; ++j) {
            double zj = 0.0;
            for (std::size_t c = 0; c < 3; ++c) zj += p.W[k](r, c) * h(j, c);
            acc += alpha[i][j] * zj;
          }
          EXPECT_NEAR(out(i, k * 2 + r), std::tanh(acc), 1e-12);
        }
    }
  }
}

// Relabelling nodes permutes output rows the same way.
TEST(GatLayer, PermutationEquivariance) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 5;
    const auto p = random_layer(rng, 2, 2, 3, Activation::tanh);
    const Tensor h = gradcheck_detail::random_tensor(rng, n, 3);
    const Adjacency adj = random_adjacency(rng, n);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Tensor hp = Tensor::zeros(n, 3);
    Adjacency ap = self_loops(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < 3; ++c) hp(perm[i], c) = h(i, c);
      for (std::size_t j = 0; j < n; ++j)
        if (adj(i, j)) ap.connect(perm[i], perm[j]);
    }
    const Tensor a = gat_layer(h, p, adj), b = gat_layer(hp, p, ap);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < a.cols(); ++c) ASSERT_NEAR(a(i, c), b(perm[i], c), 1e-12);
  }
}

TEST(EncodeGraph, ShapesAndIdentityStack) {
  EncoderConfig cfg{.vocab = 5, .embed_dim = 6, .model_dim = 8, .heads = 2, .layers = 2};
  ParamStore store(1);
  register_encoder_params(store, "enc", cfg);
  const std::vector<std::size_t> one{3};
  const auto out = encode_graph(one, self_loops(1), store, "enc", cfg);
  EXPECT_EQ(out.states().rows(), 1u);
  EXPECT_EQ(out.states().cols(), 8u);
  EXPECT_EQ(out.pooled.cols(), 8u);
  EXPECT_THROW(encode_graph({}, self_loops(0), store, "enc", cfg), DataError);

  EncoderConfig flat = cfg;
  flat.layers = 0;
  const std::vector<std::size_t> ids{1, 4};
  const auto raw = encode_graph(ids, self_loops(2), store, "enc", flat);
  for (std::size_t c = 0; c < 6; ++c) {
    EXPECT_EQ(raw.states()(0, c), store.at("enc.embed")(1, c));
    EXPECT_EQ(raw.states()(1, c), store.at("enc.embed")(4, c));
  }
}

TEST(EncodeGraph, ModelDimMustDivideByHeads) {
  ParamStore store(1);
  EXPECT_THROW(register_encoder_params(store, "e", {.vocab = 2, .model_dim = 10, .heads = 4}), DataError);
}

TEST(EncodeGraph, SymmetricStarLeavesGiveSameRows) {
  EncoderConfig cfg{.vocab = 4, .embed_dim = 4, .model_dim = 4, .heads = 2, .layers = 2};
  ParamStore store(3);
  register_encoder_params(store, "enc", cfg);
  Adjacency star = self_loops(4);
  for (std::size_t leaf = 1; leaf < 4; ++leaf) star.connect(0, leaf);
  const std::vector<std::size_t> a{0, 1, 1, 2}, b{0, 1, 2, 1};
  const auto x = encode_graph(a, star, store, "enc", cfg), y = encode_graph(b, star, store, "enc", cfg);
  auto rows = [](const Tensor& t) {
    std::vector<std::vector<double>> r(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i)
      for (std::size_t c = 0; c < t.cols(); ++c) r[i].push_back(t(i, c));
    std::sort(r.begin(), r.end());
    return r;
  };
  const auto rx = rows(x.states()), ry = rows(y.states());
  for (std::size_t i = 0; i < rx.size(); ++i)
    for (std::size_t c = 0; c < rx[i].size(); ++c) EXPECT_NEAR(rx[i][c], ry[i][c], 1e-12);
}

TEST(PoolClassVector, MeanOfRows) {
  const Tensor same = Tensor::from(3, 2, {1, 2, 1, 2, 1, 2});
  EXPECT_EQ(pool_class_vector(same)(0, 1), 2.0);
  const Tensor cancel = Tensor::from(2, 2, {0.3, -1.5, -0.3, 1.5});
  EXPECT_EQ(pool_class_vector(cancel)(0, 0), 0.0);
  std::mt19937_64 rng(8);
  const Tensor h = gradcheck_detail::random_tensor(rng, 7, 5);
  const Tensor m = pool_class_vector(h);
  for (std::size_t c = 0; c < 5; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < 7; ++r) s += h(r, c);
    EXPECT_NEAR(m(0, c), s / 7.0, 1e-15);
  }
}

TEST(EncodeGraph, GatLayerGradientsCheck) {
  GradCheckRegistry reg;
  reg.add("gat_layer", gat_layer_case);
  for (const auto& row : reg.run(20, 1e-6, 1e-4)) EXPECT_TRUE(row.passed) << row.max_error;
}
