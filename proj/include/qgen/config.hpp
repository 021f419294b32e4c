#pragma once

// Flat key=value run configuration. Lines starting with '#' are comments.

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "qgen/error.hpp"
#include "qgen/seq2seq.hpp"
#include "qgen/typedist.hpp"

namespace qgen {

inline const std::set<std::string>& known_modes() {
  static const std::set<std::string> m{"pipeline", "per-type", "wo-tdl", "lead3", "last3",
                                       "random3",  "total",    "textrank", "e2e"};
  return m;
}

struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t attn_dim = 64;
  double gamma = 0.7;
  double lambda_cov = 1.0;
  int coverage_start_epoch = 5;
  double tf_floor = 0.5;
  int tf_decay_epochs = 20;
  int epochs_typedist = 500;
  int epochs_summarizer = 100;
  int epochs_qgen = 100;
  int epochs_e2e = 100;
  double lr_typedist = 1e-3;
  double lr_seq2seq = 2e-3;
  double clip_norm = 5.0;
  std::size_t order_tags = 5;
  std::size_t max_summary_len = 60;
  std::size_t max_question_len = 40;
  std::size_t e2e_max_len = 100;
  std::string mode = "pipeline";
  std::string max_match = "gold";  // gold | generated
  std::string split = "test";
  std::string corpus;
  std::string out = "out";

  ModelDims dims() const { return {embed_dim, hidden_dim, heads, layers, hidden_dim, attn_dim}; }

  TypeDistConfig typedist_config() const {
    TypeDistConfig c;
    c.encoder.embed_dim = embed_dim;
    c.encoder.model_dim = hidden_dim;
    c.encoder.heads = heads;
    c.encoder.layers = layers;
    c.gamma = gamma;
    return c;
  }

  Seq2SeqTrainOptions seq2seq_options(int epochs) const {
    Seq2SeqTrainOptions o;
    o.epochs = epochs;
    o.lr = lr_seq2seq;
    o.clip_norm = clip_norm;
    o.lambda_cov = lambda_cov;
    o.coverage_start_epoch = coverage_start_epoch;
    o.tf_floor = tf_floor;
    o.tf_decay_epochs = tf_decay_epochs;
    o.seed = seed;
    return o;
  }

  void set(const std::string& key, const std::string& value);
  void validate() const;
  nlohmann::json to_json() const;
};

namespace config_detail {

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw DataError("config: bad number for " + key + ": " + v);
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace config_detail

inline void RunConfig::set(const std::string& key, const std::string& value) {
  using config_detail::parse_number;
  if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "embed_dim") embed_dim = parse_number<std::size_t>(key, value);
  else if (key == "hidden_dim") hidden_dim = parse_number<std::size_t>(key, value);
  else if (key == "heads") heads = parse_number<std::size_t>(key, value);
  else if (key == "layers") layers = parse_number<std::size_t>(key, value);
  else if (key == "attn_dim") attn_dim = parse_number<std::size_t>(key, value);
  else if (key == "gamma") gamma = parse_number<double>(key, value);
  else if (key == "lambda_cov") lambda_cov = parse_number<double>(key, value);
  else if (key == "coverage_start_epoch") coverage_start_epoch = parse_number<int>(key, value);
  else if (key == "tf_floor") tf_floor = parse_number<double>(key, value);
  else if (key == "tf_decay_epochs") tf_decay_epochs = parse_number<int>(key, value);
  else if (key == "epochs_typedist") epochs_typedist = parse_number<int>(key, value);
  else if (key == "epochs_summarizer") epochs_summarizer = parse_number<int>(key, value);
  else if (key == "epochs_qgen") epochs_qgen = parse_number<int>(key, value);
  else if (key == "epochs_e2e") epochs_e2e = parse_number<int>(key, value);
  else if (key == "lr_typedist") lr_typedist = parse_number<double>(key, value);
  else if (key == "lr_seq2seq") lr_seq2seq = parse_number<double>(key, value);
  else if (key == "clip_norm") clip_norm = parse_number<double>(key, value);
  else if (key == "order_tags") order_tags = parse_number<std::size_t>(key, value);
  else if (key == "max_summary_len") max_summary_len = parse_number<std::size_t>(key, value);
  else if (key == "max_question_len") max_question_len = parse_number<std::size_t>(key, value);
  else if (key == "e2e_max_len") e2e_max_len = parse_number<std::size_t>(key, value);
  else if (key == "mode") mode = value;
  else if (key == "max_match") max_match = value;
  else if (key == "split") split = value;
  else if (key == "corpus") corpus = value;
  else if (key == "out") out = value;
  else throw DataError("config: unknown key " + key);
}

inline void RunConfig::validate() const {
  if (!known_modes().contains(mode)) throw DataError("config: unknown mode " + mode);
  if (max_match != "gold" && max_match != "generated") throw DataError("config: max_match must be gold or generated");
  if (!parse_split(split)) throw DataError("config: unknown split " + split);
  if (gamma < 0.0 || gamma > 1.0) throw DataError("config: gamma outside [0, 1]");
  if (heads == 0 || hidden_dim % heads != 0) throw DataError("config: hidden_dim must be a multiple of heads");
  if (order_tags < 1 || order_tags > 10) throw DataError("config: order_tags must be in 1..10");
  if (tf_floor < 0.0 || tf_floor > 1.0) throw DataError("config: tf_floor outside [0, 1]");
  if (max_summary_len == 0 || max_question_len == 0 || e2e_max_len == 0) {
    throw DataError("config: decode lengths must be >= 1");
  }
}

inline nlohmann::json RunConfig::to_json() const {
  return {{"seed", seed},
          {"embed_dim", embed_dim},
          {"hidden_dim", hidden_dim},
          {"heads", heads},
          {"layers", layers},
          {"attn_dim", attn_dim},
          {"gamma", gamma},
          {"lambda_cov", lambda_cov},
          {"coverage_start_epoch", coverage_start_epoch},
          {"tf_floor", tf_floor},
          {"tf_decay_epochs", tf_decay_epochs},
          {"epochs_typedist", epochs_typedist},
          {"epochs_summarizer", epochs_summarizer},
          {"epochs_qgen", epochs_qgen},
          {"epochs_e2e", epochs_e2e},
          {"lr_typedist", lr_typedist},
          {"lr_seq2seq", lr_seq2seq},
          {"clip_norm", clip_norm},
          {"order_tags", order_tags},
          {"max_summary_len", max_summary_len},
          {"max_question_len", max_question_len},
          {"e2e_max_len", e2e_max_len},
          {"mode", mode},
          {"max_match", max_match},
          {"split", split},
          {"corpus", corpus},
          {"out", out}};
}

inline RunConfig parse_config(std::istream& in, std::string_view source = "<config>") {
  RunConfig c;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    const auto t = config_detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw DataError(std::string(source) + ":" + std::to_string(n) + ": expected key=value");
    }
    try {
      c.set(config_detail::trim(std::string_view(t).substr(0, eq)), config_detail::trim(std::string_view(t).substr(eq + 1)));
    } catch (const DataError& e) {
      throw DataError(std::string(source) + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config: cannot open " + path);
  return parse_config(in, path);
}

}  // namespace qgen
