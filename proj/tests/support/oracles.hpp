#pragma once

// Independent reference computations shared by unit and acceptance tests.

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace qgen_test {

// Full (n+1) x (m+1) LCS table, no row reuse.
inline std::size_t dp_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = a.size(); i-- > 0;)
    for (std::size_t j = b.size(); j-- > 0;)
      t[i][j] = a[i] == b[j] ? 1 + t[i + 1][j + 1] : std::max(t[i + 1][j], t[i][j + 1]);
  return t[0][0];
}

inline std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t max_len = 12, int alphabet = 4) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> sym(0, alphabet - 1);
  std::vector<std::string> out(len(rng));
  for (auto& t : out) t = std::string(1, static_cast<char>('a' + sym(rng)));
  return out;
}

// Three sentences: the middle one shares two words with each neighbour, the
// outer two share nothing.
inline const char* hub_document() { return "the fox ran home . the fox saw a bird . a bird sang ."; }

// Damped PageRank on the hub document's 3x3 similarity matrix, written out by
// hand: |S1| = 4, |S2| = 5, |S3| = 3, overlaps 2 (S1,S2) and 2 (S2,S3).
inline std::array<double, 3> hub_oracle_scores() {
  const double w12 = 2.0 / (std::log(5.0) + std::log(6.0));
  const double w23 = 2.0 / (std::log(6.0) + std::log(4.0));
  // M[i][j]: share of j's score passed to i.
  const double M[3][3] = {{0.0, w12 / (w12 + w23), 0.0}, {1.0, 0.0, 1.0}, {0.0, w23 / (w12 + w23), 0.0}};
  std::array<double, 3> s{1.0, 1.0, 1.0};
  for (int it = 0; it < 100000; ++it) {
    std::array<double, 3> next{};
    for (int i = 0; i < 3; ++i) {
      double in = 0.0;
      for (int j = 0; j < 3; ++j) in += M[i][j] * s[j];
      next[i] = 0.15 + 0.85 * in;
    }
    double change = 0.0;
    for (int i = 0; i < 3; ++i) change += std::abs(next[i] - s[i]);
    s = next;
    if (change < 1e-15) break;
  }
  return s;
}

}  // namespace qgen_test
