#pragma once

// Rule-based rewriting of a question-answer pair into a declarative statement
// used as the summarization target.
//
// Patterns (tokens already lowercased, trailing "?" removed):
//   why did|does|do S V rest          -> S V-past rest [because] A .
//   WH did|does|do S do rest          -> S A rest .
//   WH did|does|do S V rest           -> S V-past rest A .
//     (WH = what | who | whom | which | how | how many X | how much X)
//   what happened after|because|before|when|while X
//                                     -> after|because|... X , A .
// Anything else falls back to "clause : A" with the record flagged.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "qgen/corpus.hpp"
#include "qgen/text.hpp"

namespace qgen {

struct Statement {
  Tokens tokens;
  bool flagged = false;
};

namespace silver_detail {

inline const std::map<std::string, std::string>& past_forms() {
  static const std::map<std::string, std::string> forms{
      {"admit", "admitted"}, {"ask", "asked"},       {"be", "was"},          {"bear", "bore"},
      {"beat", "beat"},      {"become", "became"},   {"beg", "begged"},      {"begin", "began"},
      {"bite", "bit"},       {"blow", "blew"},       {"break", "broke"},     {"bring", "brought"},
      {"build", "built"},    {"buy", "bought"},      {"catch", "caught"},    {"choose", "chose"},
      {"come", "came"},      {"cut", "cut"},         {"dig", "dug"},         {"do", "did"},
      {"draw", "drew"},      {"drink", "drank"},     {"drive", "drove"},     {"drop", "dropped"},
      {"eat", "ate"},        {"fall", "fell"},       {"feed", "fed"},        {"feel", "felt"},
      {"fight", "fought"},   {"find", "found"},      {"fly", "flew"},        {"forget", "forgot"},
      {"get", "got"},        {"give", "gave"},       {"go", "went"},         {"grow", "grew"},
      {"hang", "hung"},      {"have", "had"},        {"hear", "heard"},      {"hide", "hid"},
      {"hit", "hit"},        {"hold", "held"},       {"hurt", "hurt"},       {"keep", "kept"},
      {"know", "knew"},      {"lead", "led"},        {"leave", "left"},      {"let", "let"},
      {"lie", "lay"},        {"lose", "lost"},       {"make", "made"},       {"meet", "met"},
      {"pay", "paid"},       {"put", "put"},         {"read", "read"},       {"ride", "rode"},
      {"ring", "rang"},      {"rise", "rose"},       {"run", "ran"},         {"say", "said"},
      {"see", "saw"},        {"sell", "sold"},       {"send", "sent"},       {"set", "set"},
      {"shake", "shook"},    {"shine", "shone"},     {"shut", "shut"},       {"sing", "sang"},
      {"sink", "sank"},      {"sit", "sat"},         {"sleep", "slept"},     {"speak", "spoke"},
      {"spend", "spent"},    {"spin", "spun"},       {"spring", "sprang"},   {"stand", "stood"},
      {"steal", "stole"},    {"stick", "stuck"},     {"stop", "stopped"},    {"swim", "swam"},
      {"take", "took"},      {"teach", "taught"},    {"tear", "tore"},       {"tell", "told"},
      {"think", "thought"},  {"throw", "threw"},     {"understand", "understood"},
      {"wake", "woke"},      {"wear", "wore"},       {"weep", "wept"},       {"win", "won"},
      {"write", "wrote"}};
  return forms;
}

// Regular verbs recognised when locating the main verb after the subject.
inline const std::set<std::string>& regular_verbs() {
  static const std::set<std::string> verbs{
      "agree",   "allow",   "answer",   "arrive",  "bake",    "believe", "call",     "carry",
      "cart",    "challenge", "change", "chew",    "climb",   "cook",    "cry",      "dance",
      "decide",  "destroy", "discover", "dress",   "enjoy",   "escape",  "express",  "fear",
      "fill",    "follow",  "hate",     "help",    "hope",    "huff",    "hunt",     "hurry",
      "invite",  "join",    "jump",     "kill",    "kiss",    "knock",   "laugh",    "learn",
      "like",    "listen",  "live",     "lock",    "look",    "love",    "marry",    "move",
      "need",    "offer",   "open",     "pick",    "plant",   "play",    "please",   "praise",
      "pray",    "prepare", "promise",  "pull",    "push",    "reach",   "receive",  "refuse",
      "remember", "repulse", "rescue",  "return",  "sail",    "save",    "share",    "shout",
      "smile",   "start",   "stay",     "talk",    "thank",   "touch",   "trick",    "try",
      "turn",    "use",     "visit",    "wait",    "walk",    "want",    "warn",     "wash",
      "watch",   "wish",    "work",     "worry"};
  return verbs;
}

inline bool is_verb(const std::string& w) { return past_forms().contains(w) || regular_verbs().contains(w); }

inline bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

inline const std::set<std::string>& determiners() {
  static const std::set<std::string> d{"a", "an", "the", "his", "her", "their", "its", "my", "your", "our", "this", "that"};
  return d;
}

inline const std::set<std::string>& wh_words() {
  static const std::set<std::string> w{"what", "why", "how", "who", "whom", "whose", "which", "where", "when"};
  return w;
}

// Subject length when no verb from the lexicon is found: a determiner plus one
// word, or a single word, each optionally extended by "'s word" chains.
inline std::size_t heuristic_subject_end(const Tokens& t, std::size_t from) {
  std::size_t i = from;
  if (i < t.size() && determiners().contains(t[i])) ++i;
  if (i < t.size()) ++i;
  while (i + 1 < t.size() && t[i] == "'s") i += 2;
  return i;
}

// Index of the main verb in t[from..], or npos.
inline std::size_t find_verb(const Tokens& t, std::size_t from) {
  for (std::size_t i = from + 1; i < t.size(); ++i)
    if (is_verb(t[i])) return i;
  const auto h = heuristic_subject_end(t, from);
  return h < t.size() && h > from ? h : std::string::npos;
}

inline bool is_aux(const std::string& w) { return w == "did" || w == "does" || w == "do"; }

inline void append(Tokens& out, const Tokens& src, std::size_t b, std::size_t e) {
  out.insert(out.end(), src.begin() + static_cast<std::ptrdiff_t>(b), src.begin() + static_cast<std::ptrdiff_t>(e));
}

}  // namespace silver_detail

/// Past-tense form: irregular lookup, otherwise the "-ed" rule with the usual
/// spelling adjustments for a final "e" and consonant + "y".
inline std::string past_tense(const std::string& verb) {
  using namespace silver_detail;
  if (auto it = past_forms().find(verb); it != past_forms().end()) return it->second;
  if (verb.empty()) return verb;
  if (verb.back() == 'e') return verb + "d";
  if (verb.size() > 1 && verb.back() == 'y' && !is_vowel(verb[verb.size() - 2])) {
    return verb.substr(0, verb.size() - 1) + "ied";
  }
  return verb + "ed";
}

inline Statement rewrite_qa_to_statement(const QARecord& qa) {
  using namespace silver_detail;
  if (!is_hcd(qa.qtype)) {
    throw DataError("rewrite_qa_to_statement: unsupported question type " + std::string(to_string(qa.qtype)));
  }
  Tokens q = qa.question;
  while (!q.empty() && (q.back() == "?" || q.back() == ".")) q.pop_back();
  const Tokens& a = qa.answer;
  Statement st;
  auto finish = [&](Tokens body) {
    body.push_back(".");
    st.tokens = std::move(body);
    return st;
  };

  // what happened after|because|... X
  static const std::set<std::string> connectives{"after", "because", "before", "when", "while"};
  if (q.size() >= 3 && q[0] == "what" && q[1] == "happened" && connectives.contains(q[2])) {
    Tokens out;
    append(out, q, 2, q.size());
    out.push_back(",");
    append(out, a, 0, a.size());
    return finish(std::move(out));
  }

  // Locate "<aux> S V rest" after the wh-phrase.
  std::size_t aux = std::string::npos;
  if (!q.empty() && wh_words().contains(q[0])) {
    std::size_t i = 1;
    if (q[0] == "how" && i < q.size() && (q[i] == "many" || q[i] == "much")) i += 2;
    if (i < q.size() && is_aux(q[i])) aux = i;
  }
  if (aux != std::string::npos && aux + 1 < q.size() && q[0] != "where" && q[0] != "when") {
    const std::size_t subj = aux + 1;
    const bool why = q[0] == "why";
    // "WH did S do rest": the answer supplies the verb phrase.
    if (!why) {
      for (std::size_t d = subj + 1; d < q.size(); ++d) {
        if (q[d] == "do") {
          Tokens out;
          append(out, q, subj, d);
          append(out, a, 0, a.size());
          append(out, q, d + 1, q.size());
          return finish(std::move(out));
        }
      }
    }
    const std::size_t verb = find_verb(q, subj);
    if (verb != std::string::npos && verb > subj && verb < q.size()) {
      Tokens out;
      append(out, q, subj, verb);
      out.push_back(past_tense(q[verb]));
      append(out, q, verb + 1, q.size());
      static const std::set<std::string> causal_lead{"because", "to", "so", "since", "in", "for"};
      if (why && (a.empty() || !causal_lead.contains(a.front()))) out.push_back("because");
      append(out, a, 0, a.size());
      return finish(std::move(out));
    }
  }

  // Fallback: drop the leading wh-word(s), join with the answer, flag.
  std::size_t b = 0;
  while (b < q.size() && wh_words().contains(q[b])) ++b;
  Tokens out;
  append(out, q, b, q.size());
  out.push_back(":");
  append(out, a, 0, a.size());
  st.tokens = std::move(out);
  st.flagged = true;
  return st;
}

/// Fills ParsedParagraph::silver for every HCD question, in QA order.
inline Corpus with_silver(const Corpus& c) {
  Corpus out = c;
  for (auto& p : out.paragraphs) {
    p.silver.clear();
    for (const auto& q : p.qa) {
      if (!is_hcd(q.qtype)) continue;
      auto st = rewrite_qa_to_statement(q);
      p.silver.push_back({q.qtype, q.order_index, std::move(st.tokens), st.flagged});
    }
  }
  return out;
}

}  // namespace qgen
