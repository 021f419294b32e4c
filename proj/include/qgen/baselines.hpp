#pragma once

// Extractive summary baselines: lead/last/random sentences and TextRank.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qgen/error.hpp"
#include "qgen/graph.hpp"
#include "qgen/text.hpp"

namespace qgen {

enum class ExtractMode { lead3, last3, random3, total };

inline std::optional<ExtractMode> parse_extract_mode(std::string_view s) {
  if (s == "lead3") return ExtractMode::lead3;
  if (s == "last3") return ExtractMode::last3;
  if (s == "random3") return ExtractMode::random3;
  if (s == "total") return ExtractMode::total;
  return std::nullopt;
}

inline std::vector<Tokens> split_sentences(const Tokens& tokens) {
  std::vector<Tokens> out;
  for (const auto& s : sentence_spans(tokens)) {
    out.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(s.begin),
                     tokens.begin() + static_cast<std::ptrdiff_t>(s.end));
  }
  return out;
}

inline std::vector<Tokens> extract_baseline(const Tokens& paragraph, ExtractMode mode, std::uint64_t seed = 0) {
  auto sents = split_sentences(paragraph);
  const std::size_t k = std::min<std::size_t>(3, sents.size());
  switch (mode) {
    case ExtractMode::lead3:
      sents.resize(k);
      return sents;
    case ExtractMode::last3:
      return {sents.end() - static_cast<std::ptrdiff_t>(k), sents.end()};
    case ExtractMode::random3: {
      std::vector<std::size_t> idx(sents.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::mt19937_64 rng(seed);
      // Partial Fisher-Yates: the first k positions are a uniform sample.
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
      }
      std::vector<Tokens> out;
      for (std::size_t i = 0; i < k; ++i) out.push_back(sents[idx[i]]);
      return out;
    }
    case ExtractMode::total:
      return sents;
  }
  return sents;
}

/// Overlap of distinct non-punctuation tokens, normalized by
/// log(1 + |S_i|) + log(1 + |S_j|).
inline double sentence_similarity(const Tokens& a, const Tokens& b) {
  std::set<std::string> sa, sb;
  for (const auto& t : a)
    if (!is_punct_token(t)) sa.insert(t);
  for (const auto& t : b)
    if (!is_punct_token(t)) sb.insert(t);
  if (sa.empty() || sb.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  return static_cast<double>(common) /
         (std::log(1.0 + static_cast<double>(sa.size())) + std::log(1.0 + static_cast<double>(sb.size())));
}

struct TextRankOptions {
  double damping = 0.85;
  double tolerance = 1e-6;
  int max_iterations = 10000;
};

/// Weighted PageRank over the sentence graph, initial scores 1:
///   S_i <- (1 - d) + d * sum_j w_ji / W_j * S_j
/// A sentence with no edges spreads its score evenly over all sentences, so
/// the scores keep summing to n.
inline std::vector<double> textrank_scores(const std::vector<std::vector<double>>& w, const TextRankOptions& o = {}) {
  const std::size_t n = w.size();
  std::vector<double> out_weight(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) out_weight[j] += w[j][k];
  std::vector<double> s(n, 1.0), next(n);
  for (int it = 0; it < o.max_iterations; ++it) {
    double dangling = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (out_weight[j] == 0.0) dangling += s[j];
    for (std::size_t i = 0; i < n; ++i) {
      double in = dangling / static_cast<double>(n);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && out_weight[j] > 0.0) in += w[j][i] / out_weight[j] * s[j];
      next[i] = (1.0 - o.damping) + o.damping * in;
    }
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - s[i]);
    s.swap(next);
    if (change < o.tolerance) break;
  }
  return s;
}

inline std::vector<std::vector<double>> similarity_matrix(const std::vector<Tokens>& sents) {
  const std::size_t n = sents.size();
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) w[i][j] = sentence_similarity(sents[i], sents[j]);
  return w;
}

/// Top-k sentences by score, ties broken by position; returned in rank order.
inline std::vector<Tokens> textrank_summary(const Tokens& paragraph, std::size_t k) {
  const auto sents = split_sentences(paragraph);
  if (sents.empty()) throw DataError("textrank_summary: no sentences");
  const auto scores = textrank_scores(similarity_matrix(sents));
  std::vector<std::size_t> idx(sents.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<Tokens> out;
  for (std::size_t i = 0; i < std::min(k, idx.size()); ++i) out.push_back(sents[idx[i]]);
  return out;
}

}  // namespace qgen
