#pragma once

// Rouge-L with the concatenation and max-match aggregation protocols, and the
// type-distribution KL report.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qgen/error.hpp"
#include "qgen/text.hpp"
#include "qgen/typedist.hpp"

namespace qgen {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline nlohmann::json to_json(const RougeScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline RougeScore rouge_from_lcs(std::size_t lcs, std::size_t hyp_len, std::size_t ref_len) {
  RougeScore s;
  s.precision = hyp_len ? static_cast<double>(lcs) / static_cast<double>(hyp_len) : 0.0;
  s.recall = ref_len ? static_cast<double>(lcs) / static_cast<double>(ref_len) : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

inline RougeScore rouge_l(const Tokens& hyp, const Tokens& ref) {
  return rouge_from_lcs(lcs_length(hyp, ref), hyp.size(), ref.size());
}

inline Tokens concat_tokens(const std::vector<Tokens>& seqs) {
  Tokens out;
  for (const auto& s : seqs) out.insert(out.end(), s.begin(), s.end());
  return out;
}

inline RougeScore concat_protocol(const std::vector<Tokens>& generated, const std::vector<Tokens>& gold) {
  return rouge_l(concat_tokens(generated), concat_tokens(gold));
}

enum class MaxMatchAverage { over_gold, over_generated };

/// For each gold question, the generated question with the best F1 (first on
/// ties); P, R and F1 of those matches are averaged over gold. The
/// over_generated variant swaps the roles: each generated question takes its
/// best gold match and the average runs over generated questions.
inline RougeScore max_match_protocol(const std::vector<Tokens>& generated, const std::vector<Tokens>& gold,
                                     MaxMatchAverage avg = MaxMatchAverage::over_gold) {
  if (gold.empty()) throw DataError("max_match_protocol: empty gold list");
  const bool over_gold = avg == MaxMatchAverage::over_gold;
  const auto& outer = over_gold ? gold : generated;
  const auto& inner = over_gold ? generated : gold;
  if (outer.empty()) return {};
  RougeScore total;
  for (const auto& o : outer) {
    RougeScore best;
    bool have = false;
    for (const auto& i : inner) {
      const RougeScore s = over_gold ? rouge_l(i, o) : rouge_l(o, i);
      if (!have || s.f1 > best.f1) {
        best = s;
        have = true;
      }
    }
    total.precision += best.precision;
    total.recall += best.recall;
    total.f1 += best.f1;
  }
  const auto n = static_cast<double>(outer.size());
  return {total.precision / n, total.recall / n, total.f1 / n};
}

inline RougeScore mean_score(const std::vector<RougeScore>& xs) {
  RougeScore m;
  if (xs.empty()) return m;
  for (const auto& s : xs) {
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
  }
  const auto n = static_cast<double>(xs.size());
  return {m.precision / n, m.recall / n, m.f1 / n};
}

/// Mean over paragraphs of KL(append_pseudo_label(gold) || predicted). Both
/// maps are keyed by paragraph id and must hold the same ids.
inline double type_kl_report(const std::map<std::string, std::vector<int>>& gold,
                             const std::map<std::string, TypeDistribution>& predicted) {
  if (gold.size() != predicted.size()) throw DataError("type_kl_report: paragraph ids do not match");
  if (gold.empty()) throw DataError("type_kl_report: no paragraphs");
  double s = 0.0;
  for (const auto& [id, counts] : gold) {
    auto it = predicted.find(id);
    if (it == predicted.end()) throw DataError("type_kl_report: no prediction for paragraph " + id);
    s += kl_loss(append_pseudo_label(counts), it->second);
  }
  return s / static_cast<double>(gold.size());
}

}  // namespace qgen
