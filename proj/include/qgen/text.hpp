#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qgen/error.hpp"

namespace qgen {

using Tokens = std::vector<std::string>;

// Half-open token range [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  bool operator==(const Span&) const = default;
};

/// Lowercases, splits on whitespace and detaches punctuation. Every punctuation
/// character is its own token, except an apostrophe directly followed by
/// letters, which starts a clitic token ("crow's" -> "crow", "'s").
inline Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      flush();
    } else if (c == '\'' && i + 1 < text.size() && std::isalpha(static_cast<unsigned char>(text[i + 1]))) {
      flush();
      cur.push_back('\'');
    } else if (std::ispunct(c)) {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

inline std::string join(const Tokens& tokens, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

inline bool is_punct_token(std::string_view t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
  });
}

inline bool is_sentence_final(std::string_view t) { return t == "." || t == "!" || t == "?"; }

/// Token <-> id map. Ids are assigned specials first, then words in sorted order.
class Vocab {
 public:
  static constexpr std::string_view kUnk = "<unk>";
  static constexpr std::string_view kBos = "<bos>";
  static constexpr std::string_view kEos = "<eos>";

  Vocab() = default;

  static Vocab build(const std::vector<std::string>& specials, const std::set<std::string>& words) {
    Vocab v;
    for (auto s : {kUnk, kBos, kEos}) v.add(std::string(s));
    for (const auto& s : specials) v.add(s);
    for (const auto& w : words) v.add(w);
    return v;
  }

  static Vocab from_list(const std::vector<std::string>& tokens) {
    Vocab v;
    for (const auto& t : tokens) v.add(t);
    if (!v.contains(std::string(kUnk)) || !v.contains(std::string(kBos)) || !v.contains(std::string(kEos))) {
      throw DataError("vocab: missing special tokens");
    }
    return v;
  }

  std::size_t size() const { return tokens_.size(); }
  bool contains(const std::string& t) const { return ids_.contains(t); }
  std::size_t id(const std::string& t) const {
    auto it = ids_.find(t);
    return it == ids_.end() ? unk() : it->second;
  }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::size_t unk() const { return ids_.at(std::string(kUnk)); }
  std::size_t bos() const { return ids_.at(std::string(kBos)); }
  std::size_t eos() const { return ids_.at(std::string(kEos)); }

 private:
  void add(const std::string& t) {
    if (ids_.contains(t)) return;
    ids_.emplace(t, tokens_.size());
    tokens_.push_back(t);
  }

  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t> ids_;
};

}  // namespace qgen
