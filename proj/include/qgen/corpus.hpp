#pragma once

// Annotated paragraphs, their line-delimited JSON schema, HCD filtering and
// dataset statistics.

#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qgen/error.hpp"
#include "qgen/text.hpp"

namespace qgen {

enum class QuestionType { action, causal, outcome, character, setting, feeling, prediction };

// The high-cognitive-demand types the pipeline is trained on, in slot order.
inline constexpr std::array<QuestionType, 3> kHcdTypes{QuestionType::action, QuestionType::causal,
                                                       QuestionType::outcome};

inline std::string_view to_string(QuestionType t) {
  switch (t) {
    case QuestionType::action: return "action";
    case QuestionType::causal: return "causal";
    case QuestionType::outcome: return "outcome";
    case QuestionType::character: return "character";
    case QuestionType::setting: return "setting";
    case QuestionType::feeling: return "feeling";
    case QuestionType::prediction: return "prediction";
  }
  return "?";
}

inline std::optional<QuestionType> parse_question_type(std::string_view s) {
  for (auto t : {QuestionType::action, QuestionType::causal, QuestionType::outcome, QuestionType::character,
                 QuestionType::setting, QuestionType::feeling, QuestionType::prediction}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

inline bool is_hcd(QuestionType t) {
  return t == QuestionType::action || t == QuestionType::causal || t == QuestionType::outcome;
}

// Slot of an HCD type in distribution vectors.
inline std::size_t hcd_index(QuestionType t) {
  for (std::size_t i = 0; i < kHcdTypes.size(); ++i)
    if (kHcdTypes[i] == t) return i;
  throw DataError("not an HCD question type: " + std::string(to_string(t)));
}

enum class Split { train, val, test };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

inline std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  return std::nullopt;
}

struct QARecord {
  Tokens question;
  Tokens answer;
  QuestionType qtype = QuestionType::action;
  int order_index = 1;
  bool spans_multiple = false;

  bool operator==(const QARecord&) const = default;
};

struct SilverSummary {
  QuestionType qtype = QuestionType::action;
  int order_index = 1;
  Tokens tokens;
  bool flagged = false;

  bool operator==(const SilverSummary&) const = default;
};

struct ParsedParagraph {
  std::string id;
  Split split = Split::train;
  Tokens tokens;
  std::vector<int> dep_heads;  // self index marks a root
  Tokens dep_labels;
  std::vector<Span> edu_spans;
  std::vector<int> edu_heads;  // self index marks the root EDU
  std::vector<QARecord> qa;
  std::vector<SilverSummary> silver;

  bool operator==(const ParsedParagraph&) const = default;

  // Question count per HCD type, in kHcdTypes order.
  std::array<int, 3> hcd_counts() const {
    std::array<int, 3> c{0, 0, 0};
    for (const auto& q : qa)
      if (is_hcd(q.qtype)) ++c[hcd_index(q.qtype)];
    return c;
  }
};

struct Corpus {
  std::vector<ParsedParagraph> paragraphs;

  bool operator==(const Corpus&) const = default;

  Corpus only(Split s) const {
    Corpus out;
    for (const auto& p : paragraphs)
      if (p.split == s) out.paragraphs.push_back(p);
    return out;
  }
};

/// Checks the structural invariants of one paragraph; the message names the field.
inline void validate_paragraph(const ParsedParagraph& p) {
  const auto n = p.tokens.size();
  auto fail = [&](std::string_view field, const std::string& why) {
    throw DataError(std::string(field) + ": " + why);
  };
  if (p.id.empty()) fail("id", "empty");
  if (n == 0) fail("tokens", "empty");
  if (p.dep_heads.size() != n) fail("dep_heads", "length differs from tokens");
  if (p.dep_labels.size() != n) fail("dep_labels", "length differs from tokens");
  if (p.edu_spans.empty()) fail("edu_spans", "empty");
  std::size_t expect = 0;
  std::vector<std::size_t> edu_of(n);
  for (std::size_t e = 0; e < p.edu_spans.size(); ++e) {
    const auto& s = p.edu_spans[e];
    if (s.begin != expect || s.end <= s.begin || s.end > n) {
      fail("edu_spans", "spans do not partition the tokens at EDU " + std::to_string(e));
    }
    for (auto i = s.begin; i < s.end; ++i) edu_of[i] = e;
    expect = s.end;
  }
  if (expect != n) fail("edu_spans", "spans do not cover all tokens");
  std::vector<int> roots(p.edu_spans.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int h = p.dep_heads[i];
    if (h < 0 || static_cast<std::size_t>(h) >= n) fail("dep_heads", "head out of range at token " + std::to_string(i));
    if (edu_of[static_cast<std::size_t>(h)] != edu_of[i]) {
      fail("dep_heads", "head of token " + std::to_string(i) + " crosses an EDU boundary");
    }
    if (static_cast<std::size_t>(h) == i) ++roots[edu_of[i]];
  }
  for (std::size_t e = 0; e < roots.size(); ++e) {
    if (roots[e] != 1) fail("dep_heads", "EDU " + std::to_string(e) + " has " + std::to_string(roots[e]) + " roots");
  }
  if (p.edu_heads.size() != p.edu_spans.size()) fail("edu_heads", "length differs from edu_spans");
  int root_edus = 0;
  for (std::size_t e = 0; e < p.edu_heads.size(); ++e) {
    const int h = p.edu_heads[e];
    if (h < 0 || static_cast<std::size_t>(h) >= p.edu_heads.size()) fail("edu_heads", "head out of range");
    if (static_cast<std::size_t>(h) == e) ++root_edus;
  }
  if (root_edus != 1) fail("edu_heads", "expected exactly one root EDU, found " + std::to_string(root_edus));
  for (const auto& q : p.qa) {
    if (q.order_index < 1) fail("qa.order_index", "must be >= 1");
    if (q.question.empty()) fail("qa.question", "empty");
    if (q.answer.empty()) fail("qa.answer", "empty");
  }
}

inline nlohmann::json to_json(const ParsedParagraph& p) {
  nlohmann::json spans = nlohmann::json::array();
  for (const auto& s : p.edu_spans) spans.push_back({s.begin, s.end});
  nlohmann::json qa = nlohmann::json::array();
  for (const auto& q : p.qa) {
    qa.push_back({{"question", q.question},
                  {"answer", q.answer},
                  {"qtype", to_string(q.qtype)},
                  {"order_index", q.order_index},
                  {"spans_multiple", q.spans_multiple}});
  }
  nlohmann::json j = {{"id", p.id},           {"split", to_string(p.split)}, {"tokens", p.tokens},
                      {"dep_heads", p.dep_heads}, {"dep_labels", p.dep_labels}, {"edu_spans", spans},
                      {"edu_heads", p.edu_heads}, {"qa", qa}};
  if (!p.silver.empty()) {
    nlohmann::json silver = nlohmann::json::array();
    for (const auto& s : p.silver) {
      silver.push_back({{"qtype", to_string(s.qtype)},
                        {"order_index", s.order_index},
                        {"tokens", s.tokens},
                        {"flagged", s.flagged}});
    }
    j["silver"] = std::move(silver);
  }
  return j;
}

inline QuestionType qtype_field(const nlohmann::json& j) {
  const auto s = j.at("qtype").get<std::string>();
  auto t = parse_question_type(s);
  if (!t) throw DataError("qtype: unknown question type '" + s + "'");
  return *t;
}

inline ParsedParagraph paragraph_from_json(const nlohmann::json& j) {
  ParsedParagraph p;
  try {
    p.id = j.at("id").get<std::string>();
    const auto split = j.at("split").get<std::string>();
    auto s = parse_split(split);
    if (!s) throw DataError("split: unknown split '" + split + "'");
    p.split = *s;
    p.tokens = j.at("tokens").get<Tokens>();
    p.dep_heads = j.at("dep_heads").get<std::vector<int>>();
    p.dep_labels = j.at("dep_labels").get<Tokens>();
    for (const auto& sp : j.at("edu_spans")) {
      if (sp.size() != 2) throw DataError("edu_spans: each span needs [start, end]");
      p.edu_spans.push_back({sp[0].get<std::size_t>(), sp[1].get<std::size_t>()});
    }
    p.edu_heads = j.at("edu_heads").get<std::vector<int>>();
    for (const auto& q : j.at("qa")) {
      QARecord r;
      r.question = q.at("question").get<Tokens>();
      r.answer = q.at("answer").get<Tokens>();
      r.qtype = qtype_field(q);
      r.order_index = q.at("order_index").get<int>();
      r.spans_multiple = q.at("spans_multiple").get<bool>();
      p.qa.push_back(std::move(r));
    }
    if (j.contains("silver")) {
      for (const auto& s : j.at("silver")) {
        SilverSummary v;
        v.qtype = qtype_field(s);
        v.order_index = s.at("order_index").get<int>();
        v.tokens = s.at("tokens").get<Tokens>();
        v.flagged = s.value("flagged", false);
        p.silver.push_back(std::move(v));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("schema: ") + e.what());
  }
  validate_paragraph(p);
  return p;
}

/// Parses a line-delimited corpus. Blank lines and provenance header lines
/// (objects carrying "run_config" only) are skipped.
inline Corpus parse_corpus(std::istream& in, std::string_view source = "<stream>") {
  Corpus c;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = std::string(source) + ":" + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + "parse error: " + e.what());
    }
    if (j.is_object() && j.contains("run_config") && !j.contains("id")) continue;
    try {
      auto p = paragraph_from_json(j);
      if (!ids.insert(p.id).second) throw DataError("id: duplicate paragraph id " + p.id);
      c.paragraphs.push_back(std::move(p));
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
  }
  return c;
}

inline Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read corpus " + path);
  return parse_corpus(in, path);
}

inline std::string serialize_corpus(const Corpus& c) {
  std::string out;
  for (const auto& p : c.paragraphs) {
    out += to_json(p).dump();
    out += '\n';
  }
  return out;
}

/// Keeps action/causal/outcome questions confined to one paragraph and drops
/// paragraphs left without questions.
inline Corpus filter_hcd(const Corpus& c) {
  Corpus out;
  for (const auto& p : c.paragraphs) {
    ParsedParagraph q = p;
    q.qa.clear();
    for (const auto& r : p.qa)
      if (is_hcd(r.qtype) && !r.spans_multiple) q.qa.push_back(r);
    std::erase_if(q.silver, [&](const SilverSummary& s) {
      return std::none_of(q.qa.begin(), q.qa.end(), [&](const QARecord& r) {
        return r.qtype == s.qtype && r.order_index == s.order_index;
      });
    });
    if (!q.qa.empty()) out.paragraphs.push_back(std::move(q));
  }
  return out;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Population standard deviation.
inline MeanStd mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  double s = 0.0;
  for (double x : xs) s += x;
  const double m = s / static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

struct StatsReport {
  std::size_t paragraphs = 0;
  std::size_t questions = 0;
  MeanStd questions_per_paragraph;
  MeanStd tokens_paragraph;
  MeanStd tokens_summary;
  MeanStd tokens_question;
  std::array<std::size_t, 3> per_type{0, 0, 0};
};

inline StatsReport corpus_stats(const Corpus& c) {
  if (c.paragraphs.empty()) throw DataError("corpus_stats: empty corpus");
  StatsReport r;
  std::vector<double> nq, tp, ts, tq;
  for (const auto& p : c.paragraphs) {
    nq.push_back(static_cast<double>(p.qa.size()));
    tp.push_back(static_cast<double>(p.tokens.size()));
    for (const auto& q : p.qa) {
      tq.push_back(static_cast<double>(q.question.size()));
      if (is_hcd(q.qtype)) ++r.per_type[hcd_index(q.qtype)];
    }
    for (const auto& s : p.silver) ts.push_back(static_cast<double>(s.tokens.size()));
  }
  r.paragraphs = c.paragraphs.size();
  r.questions = tq.size();
  r.questions_per_paragraph = mean_std(nq);
  r.tokens_paragraph = mean_std(tp);
  r.tokens_summary = mean_std(ts);
  r.tokens_question = mean_std(tq);
  return r;
}

inline nlohmann::json to_json(const StatsReport& r) {
  return {{"paragraphs", r.paragraphs},
          {"questions", r.questions},
          {"mean_questions", r.questions_per_paragraph.mean},
          {"std_questions", r.questions_per_paragraph.std},
          {"mean_tokens_paragraph", r.tokens_paragraph.mean},
          {"std_tokens_paragraph", r.tokens_paragraph.std},
          {"mean_tokens_summary", r.tokens_summary.mean},
          {"std_tokens_summary", r.tokens_summary.std},
          {"mean_tokens_question", r.tokens_question.mean},
          {"std_tokens_question", r.tokens_question.std},
          {"count_action", r.per_type[0]},
          {"count_causal", r.per_type[1]},
          {"count_outcome", r.per_type[2]}};
}

}  // namespace qgen
