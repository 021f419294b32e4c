#pragma once

// Discourse-aware token graph: one dependency tree per EDU, EDU roots linked
// by EDU-level dependency arcs.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qgen/corpus.hpp"
#include "qgen/error.hpp"
#include "qgen/text.hpp"

namespace qgen {

// Directed dependent -> head.
struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::string label;
  bool inter_edu = false;

  bool operator==(const Edge&) const = default;
};

struct TokenGraph {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  std::vector<std::size_t> edu_of;
  std::vector<std::size_t> edu_roots;
};

struct EduSubgraph {
  Span span;
  std::vector<Edge> edges;
  std::size_t root = 0;
};

namespace graph_detail {

inline void check_partition(const std::vector<Span>& spans, std::size_t n) {
  std::size_t expect = 0;
  for (const auto& s : spans) {
    if (s.begin != expect || s.end <= s.begin) throw DataError("segment_edus: spans are not a partition");
    expect = s.end;
  }
  if (expect != n) throw DataError("segment_edus: spans are not a partition");
}

}  // namespace graph_detail

/// Returns the annotated spans after validation, or splits with the fallback
/// rule: after sentence-final punctuation, and after a comma or semicolon that
/// immediately precedes a connective.
inline std::vector<Span> segment_edus(const Tokens& tokens,
                                      const std::optional<std::vector<Span>>& provided = std::nullopt) {
  if (tokens.empty()) throw DataError("segment_edus: empty token sequence");
  if (provided) {
    graph_detail::check_partition(*provided, tokens.size());
    return *provided;
  }
  static const std::set<std::string> connectives{"because", "but", "so", "when", "after", "before", "while"};
  std::vector<Span> spans;
  std::size_t start = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    bool cut = is_sentence_final(tokens[i]);
    if (!cut && (tokens[i] == "," || tokens[i] == ";") && i + 1 < tokens.size()) {
      const auto& next = tokens[i + 1];
      cut = connectives.contains(next) || (next == "and" && i + 2 < tokens.size() && tokens[i + 2] == "then");
    }
    if (cut) {
      spans.push_back({start, i + 1});
      start = i + 1;
    }
  }
  if (start < tokens.size()) spans.push_back({start, tokens.size()});
  return spans;
}

/// Sentence boundaries: split after ".", "!" or "?".
inline std::vector<Span> sentence_spans(const Tokens& tokens) {
  std::vector<Span> spans;
  std::size_t start = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_sentence_final(tokens[i])) {
      spans.push_back({start, i + 1});
      start = i + 1;
    }
  }
  if (start < tokens.size()) spans.push_back({start, tokens.size()});
  return spans;
}

/// One edge (i, head(i)) per non-root token of the span. `dep_heads` holds
/// absolute token indices; a self-headed token is the root.
inline EduSubgraph build_edu_subgraph(Span span, const std::vector<int>& dep_heads, const Tokens& dep_labels) {
  EduSubgraph g;
  g.span = span;
  std::vector<std::size_t> roots;
  for (auto i = span.begin; i < span.end; ++i) {
    const int h = dep_heads.at(i);
    if (h < 0 || !span.contains(static_cast<std::size_t>(h))) {
      throw DataError("build_edu_subgraph: head of token " + std::to_string(i) + " leaves its EDU");
    }
    if (static_cast<std::size_t>(h) == i) {
      roots.push_back(i);
    } else {
      g.edges.push_back({i, static_cast<std::size_t>(h), i < dep_labels.size() ? dep_labels[i] : "dep", false});
    }
  }
  if (roots.size() != 1) {
    throw DataError("build_edu_subgraph: EDU [" + std::to_string(span.begin) + "," + std::to_string(span.end) +
                    ") has " + std::to_string(roots.size()) + " roots");
  }
  g.root = roots[0];
  // A single root is necessary but not sufficient: every token must reach it.
  for (auto i = span.begin; i < span.end; ++i) {
    std::size_t cur = i;
    for (std::size_t steps = 0; cur != g.root; ++steps) {
      if (steps > span.size()) throw DataError("build_edu_subgraph: dependency cycle at token " + std::to_string(i));
      cur = static_cast<std::size_t>(dep_heads[cur]);
    }
  }
  return g;
}

/// Joins per-EDU subgraphs with one edge from each non-root EDU's root token
/// to the root token of its head EDU.
inline TokenGraph link_discourse_graph(const std::vector<EduSubgraph>& subgraphs, const std::vector<int>& edu_heads) {
  if (subgraphs.size() != edu_heads.size()) throw DataError("link_discourse_graph: one head per EDU required");
  const std::size_t m = subgraphs.size();
  std::size_t root_edus = 0;
  for (std::size_t e = 0; e < m; ++e) {
    const int h = edu_heads[e];
    if (h < 0 || static_cast<std::size_t>(h) >= m) throw DataError("link_discourse_graph: EDU head out of range");
    if (static_cast<std::size_t>(h) == e) ++root_edus;
  }
  if (root_edus != 1) throw DataError("link_discourse_graph: edu_heads is not a tree (root count)");
  for (std::size_t e = 0; e < m; ++e) {
    std::size_t cur = e;
    for (std::size_t steps = 0; static_cast<std::size_t>(edu_heads[cur]) != cur; ++steps) {
      if (steps > m) throw DataError("link_discourse_graph: edu_heads is not a tree (cycle)");
      cur = static_cast<std::size_t>(edu_heads[cur]);
    }
  }
  TokenGraph g;
  for (const auto& s : subgraphs) g.node_count = std::max(g.node_count, s.span.end);
  g.edu_of.assign(g.node_count, 0);
  for (std::size_t e = 0; e < m; ++e) {
    const auto& s = subgraphs[e];
    for (auto i = s.span.begin; i < s.span.end; ++i) g.edu_of[i] = e;
    g.edu_roots.push_back(s.root);
    g.edges.insert(g.edges.end(), s.edges.begin(), s.edges.end());
  }
  for (std::size_t e = 0; e < m; ++e) {
    const auto h = static_cast<std::size_t>(edu_heads[e]);
    if (h != e) g.edges.push_back({subgraphs[e].root, subgraphs[h].root, "edu", true});
  }
  return g;
}

inline TokenGraph build_token_graph(const ParsedParagraph& p) {
  std::vector<EduSubgraph> subs;
  for (const auto& span : segment_edus(p.tokens, p.edu_spans)) {
    subs.push_back(build_edu_subgraph(span, p.dep_heads, p.dep_labels));
  }
  return link_discourse_graph(subs, p.edu_heads);
}

/// Graph for text that arrives without annotations (generated summaries):
/// fallback EDUs, a left-to-right chain inside each EDU (head = next token,
/// last token is the root), and each EDU attached to the previous one.
inline TokenGraph build_fallback_graph(const Tokens& tokens) {
  const auto spans = segment_edus(tokens);
  std::vector<int> heads(tokens.size());
  for (const auto& s : spans)
    for (auto i = s.begin; i < s.end; ++i) heads[i] = static_cast<int>(i + 1 < s.end ? i + 1 : i);
  Tokens labels(tokens.size(), "chain");
  std::vector<EduSubgraph> subs;
  std::vector<int> edu_heads;
  for (std::size_t e = 0; e < spans.size(); ++e) {
    subs.push_back(build_edu_subgraph(spans[e], heads, labels));
    edu_heads.push_back(e == 0 ? 0 : static_cast<int>(e - 1));
  }
  return link_discourse_graph(subs, edu_heads);
}

/// Undirected neighbourhood mask with self-loops, as used by the encoder.
struct Adjacency {
  std::size_t n = 0;
  std::vector<std::uint8_t> mask;

  bool operator()(std::size_t i, std::size_t j) const { return mask[i * n + j] != 0; }
  void connect(std::size_t i, std::size_t j) {
    mask[i * n + j] = 1;
    mask[j * n + i] = 1;
  }
};

inline Adjacency self_loops(std::size_t n) {
  Adjacency a{n, std::vector<std::uint8_t>(n * n, 0)};
  for (std::size_t i = 0; i < n; ++i) a.mask[i * n + i] = 1;
  return a;
}

/// Symmetrized graph edges plus self-loops. The first `prefix` nodes are
/// extra control-token nodes placed before the graph's tokens; they are linked
/// to each other and to every token.
inline Adjacency adjacency(const TokenGraph& g, std::size_t prefix = 0) {
  Adjacency a = self_loops(prefix + g.node_count);
  for (const auto& e : g.edges) a.connect(prefix + e.src, prefix + e.dst);
  for (std::size_t c = 0; c < prefix; ++c)
    for (std::size_t j = 0; j < a.n; ++j) a.connect(c, j);
  return a;
}

/// Number of nodes reachable from node 0 over undirected edges.
inline std::size_t reachable_count(const TokenGraph& g) {
  if (g.node_count == 0) return 0;
  std::vector<std::vector<std::size_t>> nbr(g.node_count);
  for (const auto& e : g.edges) {
    nbr[e.src].push_back(e.dst);
    nbr[e.dst].push_back(e.src);
  }
  std::vector<bool> seen(g.node_count, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t count = 0;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    ++count;
    for (auto w : nbr[v])
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
  }
  return count;
}

/// Debug dump: one "src -[label]-> dst" line per edge, then the EDU table.
inline std::string dump_graph(const TokenGraph& g, const Tokens& tokens) {
  std::ostringstream os;
  auto name = [&](std::size_t i) { return std::to_string(i) + ":" + (i < tokens.size() ? tokens[i] : "?"); };
  for (const auto& e : g.edges) os << name(e.src) << " -[" << e.label << "]-> " << name(e.dst) << '\n';
  for (std::size_t e = 0; e < g.edu_roots.size(); ++e) {
    std::size_t b = g.node_count, end = 0;
    for (std::size_t i = 0; i < g.node_count; ++i)
      if (g.edu_of[i] == e) {
        b = std::min(b, i);
        end = std::max(end, i + 1);
      }
    os << "edu " << e << " [" << b << "," << end << ") root " << name(g.edu_roots[e]) << '\n';
  }
  return os.str();
}

}  // namespace qgen
