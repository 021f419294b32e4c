#pragma once

// Type distribution -> counts -> tagged event summaries -> tagged questions.

#include <array>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qgen/corpus.hpp"
#include "qgen/error.hpp"
#include "qgen/graph.hpp"
#include "qgen/seq2seq.hpp"
#include "qgen/text.hpp"
#include "qgen/typedist.hpp"

namespace qgen {

inline const std::vector<std::string>& order_tag_names() {
  static const std::vector<std::string> names{"<first>",   "<second>", "<third>",  "<fourth>",
                                              "<fifth>",   "<sixth>",  "<seventh>", "<eighth>",
                                              "<ninth>",   "<tenth>"};
  return names;
}

inline std::string type_tag(QuestionType t) {
  if (!is_hcd(t)) throw DataError("control: no tag for question type " + std::string(to_string(t)));
  return "<" + std::string(to_string(t)) + ">";
}

inline std::string order_tag(int order, std::size_t order_tags = 5) {
  if (order_tags > order_tag_names().size()) throw DataError("control: at most 10 order tags are supported");
  if (order < 1 || static_cast<std::size_t>(order) > order_tags) {
    throw DataError("control: order " + std::to_string(order) + " outside 1.." + std::to_string(order_tags));
  }
  return order_tag_names()[static_cast<std::size_t>(order) - 1];
}

/// Every control token, for vocabulary construction.
inline std::vector<std::string> control_specials(std::size_t order_tags = 5) {
  std::vector<std::string> s;
  for (auto t : kHcdTypes) s.push_back(type_tag(t));
  for (std::size_t i = 1; i <= order_tags; ++i) s.push_back(order_tag(static_cast<int>(i), order_tags));
  return s;
}

struct ControlSignal {
  QuestionType type = QuestionType::action;
  int order = 1;
};

inline Tokens make_control_input(QuestionType t, int order, const Tokens& paragraph, std::size_t order_tags = 5) {
  Tokens out{type_tag(t), order_tag(order, order_tags)};
  out.insert(out.end(), paragraph.begin(), paragraph.end());
  return out;
}

// Source builders. The control tokens become graph nodes linked to everything.

inline SourceInput paragraph_source(const ParsedParagraph& p) { return {p.tokens, adjacency(build_token_graph(p))}; }

inline SourceInput controlled_paragraph_source(const ControlSignal& c, const ParsedParagraph& p,
                                               std::size_t order_tags = 5) {
  return {make_control_input(c.type, c.order, p.tokens, order_tags), adjacency(build_token_graph(p), 2)};
}

inline SourceInput text_source(const Tokens& tokens) {
  if (tokens.empty()) return {{"<unk>"}, self_loops(1)};
  return {tokens, adjacency(build_fallback_graph(tokens))};
}

inline SourceInput controlled_text_source(const ControlSignal& c, const Tokens& tokens, std::size_t order_tags = 5) {
  if (tokens.empty()) {
    Tokens t = make_control_input(c.type, c.order, {}, order_tags);
    Adjacency a = self_loops(2);
    a.connect(0, 1);
    return {t, a};
  }
  return {make_control_input(c.type, c.order, tokens, order_tags), adjacency(build_fallback_graph(tokens), 2)};
}

inline void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

// Gold question for a silver entry: the HCD question with the same type and order.
inline const QARecord* find_question(const ParsedParagraph& p, QuestionType t, int order) {
  for (const auto& q : p.qa)
    if (q.qtype == t && q.order_index == order) return &q;
  return nullptr;
}

// Training pairs ------------------------------------------------------------

inline std::vector<Seq2SeqExample> summarizer_examples(const Corpus& c, std::size_t order_tags = 5,
                                                       std::optional<QuestionType> only = std::nullopt) {
  std::vector<Seq2SeqExample> out;
  for (const auto& p : c.paragraphs) {
    for (const auto& s : p.silver) {
      if (only && s.qtype != *only) continue;
      if (static_cast<std::size_t>(s.order_index) > order_tags) {
        warn(p.id + ": " + std::string(to_string(s.qtype)) + " order " + std::to_string(s.order_index) +
             " exceeds the order tags; skipped");
        continue;
      }
      out.push_back({controlled_paragraph_source({s.qtype, s.order_index}, p, order_tags), s.tokens});
    }
  }
  return out;
}

inline std::vector<Seq2SeqExample> qgen_examples(const Corpus& c, std::size_t order_tags = 5,
                                                 std::optional<QuestionType> only = std::nullopt) {
  std::vector<Seq2SeqExample> out;
  for (const auto& p : c.paragraphs) {
    for (const auto& s : p.silver) {
      if (only && s.qtype != *only) continue;
      if (static_cast<std::size_t>(s.order_index) > order_tags) continue;
      const QARecord* q = find_question(p, s.qtype, s.order_index);
      if (!q) throw DataError(p.id + ": silver entry without a matching question");
      out.push_back({controlled_text_source({s.qtype, s.order_index}, s.tokens, order_tags), q->question});
    }
  }
  return out;
}

/// Without type-distribution learning: paragraph -> all silver summaries
/// concatenated in QA order.
inline std::vector<Seq2SeqExample> untagged_summarizer_examples(const Corpus& c) {
  std::vector<Seq2SeqExample> out;
  for (const auto& p : c.paragraphs) {
    Tokens target;
    for (const auto& s : p.silver) target.insert(target.end(), s.tokens.begin(), s.tokens.end());
    if (!target.empty()) out.push_back({paragraph_source(p), target});
  }
  return out;
}

inline std::vector<Seq2SeqExample> untagged_qgen_examples(const Corpus& c) {
  std::vector<Seq2SeqExample> out;
  for (const auto& p : c.paragraphs) {
    for (const auto& s : p.silver) {
      const QARecord* q = find_question(p, s.qtype, s.order_index);
      if (!q) throw DataError(p.id + ": silver entry without a matching question");
      out.push_back({text_source(s.tokens), q->question});
    }
  }
  return out;
}

/// Paragraph -> gold HCD questions concatenated.
inline std::vector<Seq2SeqExample> e2e_examples(const Corpus& c) {
  std::vector<Seq2SeqExample> out;
  for (const auto& p : c.paragraphs) {
    Tokens target;
    for (const auto& q : p.qa)
      if (is_hcd(q.qtype)) target.insert(target.end(), q.question.begin(), q.question.end());
    if (!target.empty()) out.push_back({paragraph_source(p), target});
  }
  return out;
}

// Generation -----------------------------------------------------------------

struct GeneratedItem {
  QuestionType qtype = QuestionType::action;
  int order = 1;
  Tokens summary;
  Tokens question;
  bool kept = true;
};

struct PipelineOutput {
  std::string paragraph_id;
  TypeDistribution distribution;
  std::vector<int> counts;
  std::vector<GeneratedItem> items;

  std::vector<Tokens> questions() const {
    std::vector<Tokens> q;
    for (const auto& it : items)
      if (it.kept) q.push_back(it.question);
    return q;
  }
};

struct PipelineModels {
  std::function<TypeDistribution(const ParsedParagraph&)> predict_types;
  std::function<Tokens(const ControlSignal&, const ParsedParagraph&)> summarize;
  std::function<Tokens(const ControlSignal&, const Tokens&)> ask;
};

/// Tags in enumeration order: all orders of the first type, then the next.
inline std::vector<ControlSignal> control_plan(std::span<const int> counts, std::size_t order_tags = 5) {
  if (counts.size() != kHcdTypes.size()) throw DataError("control_plan: expected one count per HCD type");
  std::vector<ControlSignal> plan;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    int n = counts[i];
    if (n < 0) throw DataError("control_plan: negative count");
    if (static_cast<std::size_t>(n) > order_tags) {
      warn(std::string(to_string(kHcdTypes[i])) + ": " + std::to_string(n) + " questions truncated to " +
           std::to_string(order_tags));
      n = static_cast<int>(order_tags);
    }
    for (int c = 1; c <= n; ++c) plan.push_back({kHcdTypes[i], c});
  }
  return plan;
}

inline std::vector<GeneratedItem> generate_summaries(const ParsedParagraph& p, std::span<const int> counts,
                                                     const PipelineModels& m, std::size_t order_tags = 5) {
  std::vector<GeneratedItem> out;
  for (const auto& c : control_plan(counts, order_tags)) out.push_back({c.type, c.order, m.summarize(c, p), {}, true});
  return out;
}

inline void generate_questions(std::vector<GeneratedItem>& items, const PipelineModels& m) {
  for (auto& it : items) it.question = m.ask({it.qtype, it.order}, it.summary);
}

/// Marks exact duplicates (first kept) and questions under 3 tokens.
inline void postfilter(std::vector<GeneratedItem>& items) {
  std::set<Tokens> seen;
  for (auto& it : items) it.kept = it.question.size() >= 3 && seen.insert(it.question).second;
}

inline std::vector<Tokens> postfilter(const std::vector<Tokens>& questions) {
  std::vector<Tokens> out;
  std::set<Tokens> seen;
  for (const auto& q : questions)
    if (q.size() >= 3 && seen.insert(q).second) out.push_back(q);
  return out;
}

namespace pipeline_detail {

template <typename F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const NumericError& e) {
    throw NumericError(std::string("stage ") + stage + ": " + e.what());
  } catch (const std::exception& e) {
    throw DataError(std::string("stage ") + stage + ": " + e.what());
  }
}

}  // namespace pipeline_detail

inline PipelineOutput run_pipeline(const ParsedParagraph& p, const PipelineModels& m, std::size_t order_tags = 5) {
  using pipeline_detail::in_stage;
  PipelineOutput out;
  out.paragraph_id = p.id;
  out.distribution = in_stage("typedist", [&] { return m.predict_types(p); });
  out.counts = in_stage("typedist", [&] { return recover_counts(out.distribution); });
  out.items = in_stage("summarizer", [&] { return generate_summaries(p, out.counts, m, order_tags); });
  in_stage("qgen", [&] {
    generate_questions(out.items, m);
    return 0;
  });
  postfilter(out.items);
  return out;
}

/// Splits after each "?" and keeps the first `keep` questions; a trailing
/// fragment without "?" counts as a question.
inline std::vector<Tokens> split_questions(const Tokens& text, std::size_t keep = 2) {
  std::vector<Tokens> out;
  Tokens cur;
  for (const auto& t : text) {
    cur.push_back(t);
    if (t == "?") {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  if (out.size() > keep) out.resize(keep);
  return out;
}

/// Splits generated statements after each "." and keeps the first `keep`.
inline std::vector<Tokens> split_statements(const Tokens& text, std::size_t keep = 2) {
  std::vector<Tokens> out;
  Tokens cur;
  for (const auto& t : text) {
    cur.push_back(t);
    if (t == ".") {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  if (out.size() > keep) out.resize(keep);
  return out;
}

inline std::vector<Tokens> e2e_generate(const ParsedParagraph& p, const Seq2SeqModel& model,
                                        std::size_t max_len = 100) {
  return split_questions(model.generate(paragraph_source(p), max_len), 2);
}

// Serialization: one record per line, {paragraph_id, stage, qtype, order, tokens}.

inline nlohmann::json generated_record(const std::string& id, std::string_view stage, std::string_view qtype,
                                       int order, const Tokens& tokens) {
  return {{"paragraph_id", id}, {"stage", stage}, {"qtype", qtype}, {"order", order}, {"tokens", tokens}};
}

inline std::vector<nlohmann::json> to_records(const PipelineOutput& o) {
  std::vector<nlohmann::json> r;
  for (const auto& it : o.items) {
    const auto qt = to_string(it.qtype);
    r.push_back(generated_record(o.paragraph_id, "summary", qt, it.order, it.summary));
    auto q = generated_record(o.paragraph_id, "question", qt, it.order, it.question);
    q["kept"] = it.kept;
    r.push_back(std::move(q));
  }
  for (const auto& it : o.items)
    if (it.kept) r.push_back(generated_record(o.paragraph_id, "final", to_string(it.qtype), it.order, it.question));
  return r;
}

}  // namespace qgen
