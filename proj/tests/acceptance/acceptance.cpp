// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "../support/oracles.hpp"
#include "qgen/qgen.hpp"

namespace fs = std::filesystem;
using namespace qgen;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

// Trained models shared by criteria 4-6.
struct Trained {
  Corpus corpus;
  std::optional<TypeDistModel> typedist;
  std::optional<Seq2SeqModel> summarizer, qgen;
  double typedist_seconds = 0.0;
};

Trained& trained() {
  static Trained t;
  return t;
}

const RunConfig& config() {
  static const RunConfig c;
  return c;
}

Outcome c1_gradients() {
  const auto t0 = Clock::now();
  const auto reg = full_registry();
  const auto rows = reg.run(100, 1e-6, 1e-4);
  const double secs = seconds_since(t0);
  bool ok = true, gat = false, dec = false;
  double worst = 0.0;
  std::string failed;
  for (const auto& r : rows) {
    ok = ok && r.passed;
    worst = std::max(worst, r.max_error);
    if (!r.passed) failed += " " + r.name;
    gat = gat || r.name == "gat_layer";
    dec = dec || r.name == "decoder_step";
  }
  return {ok && gat && dec && secs < 30.0,
          std::to_string(rows.size()) + " cases, max rel err " + fmt(worst, 3) + ", " + fmt(secs, 3) + " s" +
              (failed.empty() ? "" : ", failed:" + failed)};
}

Outcome c2_rouge() {
  std::mt19937_64 rng(2024);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = qgen_test::random_tokens(rng), b = qgen_test::random_tokens(rng);
    const std::size_t lcs = qgen_test::dp_lcs(a, b);
    const auto s = rouge_l(a, b);
    const double p = a.empty() ? 0.0 : static_cast<double>(lcs) / static_cast<double>(a.size());
    const double r = b.empty() ? 0.0 : static_cast<double>(lcs) / static_cast<double>(b.size());
    if (lcs_length(a, b) != lcs || s.precision != p || s.recall != r) ++mismatches;
  }
  const auto hand = rouge_l(tokenize("the dog sat"), tokenize("the cat sat"));
  const bool hand_ok = std::abs(hand.f1 - 2.0 / 3.0) < 1e-15 && std::abs(hand.precision - 2.0 / 3.0) < 1e-15;
  return {mismatches == 0 && hand_ok,
          std::to_string(mismatches) + " mismatches / 1000, hand case F1 " + fmt(hand.f1, 6)};
}

Outcome c3_counts() {
  int checked = 0, bad = 0;
  std::vector<int> l(3);
  for (l[0] = 0; l[0] <= 20; ++l[0])
    for (l[1] = 0; l[1] <= 20; ++l[1])
      for (l[2] = 0; l[2] <= 20; ++l[2]) {
        ++checked;
        if (recover_counts(append_pseudo_label(l)) != l) ++bad;
      }
  return {bad == 0, std::to_string(checked) + " vectors, " + std::to_string(bad) + " failures"};
}

Outcome c4_typedist() {
  auto& t = trained();
  const RunConfig& cfg = config();
  t.corpus = with_silver(filter_hcd(load_corpus(QGEN_FIXTURE)));
  const auto t0 = Clock::now();
  t.typedist.emplace(paragraph_vocab(t.corpus), cfg.typedist_config(), cfg.seed);
  train_typedist(*t.typedist, t.corpus, {cfg.epochs_typedist, cfg.lr_typedist, cfg.clip_norm, cfg.seed});
  const double kl = mean_train_kl(*t.typedist, t.corpus);
  t.typedist_seconds = seconds_since(t0);
  return {t.corpus.paragraphs.size() == 20 && kl < 0.01 && t.typedist_seconds < 120.0,
          std::to_string(t.corpus.paragraphs.size()) + " paragraphs, " + std::to_string(cfg.epochs_typedist) +
              " epochs, mean KL " + fmt(kl) + ", " + fmt(t.typedist_seconds, 3) + " s"};
}

PipelineModels pipeline_models() {
  const auto& t = trained();
  const RunConfig& cfg = config();
  return {[&t](const ParsedParagraph& p) { return t.typedist->predict(p); },
          [&t, &cfg](const ControlSignal& c, const ParsedParagraph& p) {
            return t.summarizer->generate(controlled_paragraph_source(c, p, cfg.order_tags), cfg.max_summary_len);
          },
          [&t, &cfg](const ControlSignal& c, const Tokens& s) {
            return t.qgen->generate(controlled_text_source(c, s, cfg.order_tags), cfg.max_question_len);
          }};
}

Outcome c5_pipeline() {
  auto& t = trained();
  if (!t.typedist) return {false, "type-distribution model unavailable"};
  const RunConfig& cfg = config();
  const auto tags = control_specials(cfg.order_tags);
  const auto t0 = Clock::now();
  const auto summ_data = summarizer_examples(t.corpus, cfg.order_tags);
  t.summarizer.emplace(seq2seq_vocab(summ_data, tags), cfg.dims(), cfg.seed + 1);
  train_seq2seq(*t.summarizer, summ_data, cfg.seq2seq_options(cfg.epochs_summarizer));
  const auto q_data = qgen_examples(t.corpus, cfg.order_tags);
  t.qgen.emplace(seq2seq_vocab(q_data, tags), cfg.dims(), cfg.seed + 2);
  train_seq2seq(*t.qgen, q_data, cfg.seq2seq_options(cfg.epochs_qgen));
  const double train_secs = t.typedist_seconds + seconds_since(t0);

  const auto models = pipeline_models();
  std::size_t gold = 0, hit = 0;
  for (const auto& p : t.corpus.paragraphs) {
    const auto generated = run_pipeline(p, models, cfg.order_tags).questions();
    for (const auto& q : p.qa) {
      if (!is_hcd(q.qtype)) continue;
      ++gold;
      hit += std::find(generated.begin(), generated.end(), q.question) != generated.end();
    }
  }
  const double total_secs = t.typedist_seconds + seconds_since(t0);
  const double rate = gold ? static_cast<double>(hit) / static_cast<double>(gold) : 0.0;
  return {rate >= 0.9 && total_secs < 600.0,
          std::to_string(hit) + "/" + std::to_string(gold) + " gold questions reproduced (" + fmt(100 * rate, 4) +
              "%), training " + fmt(train_secs, 4) + " s, total " + fmt(total_secs, 4) + " s"};
}

Outcome c6_silver_upper_bound() {
  const auto& t = trained();
  if (!t.qgen) return {false, "question generator unavailable"};
  const RunConfig& cfg = config();
  std::vector<RougeScore> scores;
  for (const auto& p : t.corpus.paragraphs) {
    std::vector<Tokens> generated, gold;
    for (const auto& s : p.silver) {
      generated.push_back(t.qgen->generate(controlled_text_source({s.qtype, s.order_index}, s.tokens, cfg.order_tags),
                                           cfg.max_question_len));
    }
    for (const auto& q : p.qa)
      if (is_hcd(q.qtype)) gold.push_back(q.question);
    scores.push_back(concat_protocol(generated, gold));
  }
  const auto m = mean_score(scores);
  return {m.f1 >= 0.85, "concat P " + fmt(m.precision) + " R " + fmt(m.recall) + " F1 " + fmt(m.f1)};
}

Outcome c7_decoder_invariants() {
  int violations = 0, states = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    std::mt19937_64 rng(seed);
    const DecoderConfig cfg{5 + seed % 6, 3, 4, 5, 3};
    ParamStore store(seed);
    register_decoder_params(store, "d", cfg);
    const auto p = DecoderParams::from(store, "d", cfg);
    const std::size_t n = 1 + seed % 7;
    const Tensor enc = gradcheck_detail::random_tensor(rng, n, cfg.enc_dim);
    std::vector<std::size_t> src;
    for (std::size_t i = 0; i < n; ++i) src.push_back(rng() % (cfg.vocab + 2));
    const auto m = make_memory(enc, p, src, cfg.vocab + 2);
    DecoderState st = initial_state(m, mean_rows(enc), p);
    const int steps = 1 + static_cast<int>(seed % 6);
    for (int t = 0; t < steps; ++t) {
      ++states;
      const auto o = decoder_step(st, rng() % cfg.vocab, m, p);
      double total = 0.0;
      bool nonneg = true;
      for (double v : o.distribution.data()) {
        total += v;
        nonneg = nonneg && v >= 0.0;
      }
      std::vector<double> cov(n, 0.0);
      for (const auto& a : st.attention_history)
        for (std::size_t i = 0; i < n; ++i) cov[i] += a(i, 0);
      const bool recurrence = std::equal(cov.begin(), cov.end(), st.coverage.data().begin());
      const double cl = o.covloss.item(), pc = o.p_copy.item();
      const bool cov_ok = cl >= 0.0 && cl <= 1.0 + 1e-12 && (t > 0 || cl == 0.0);
      if (std::abs(total - 1.0) > 1e-9 || !nonneg || !recurrence || !cov_ok || !(pc > 0.0 && pc < 1.0)) ++violations;
    }
  }
  return {violations == 0, std::to_string(states) + " decoder states over 1000 draws, " + std::to_string(violations) +
                               " violations"};
}

Outcome c8_textrank() {
  const Tokens doc = tokenize(qgen_test::hub_document());
  const auto sents = split_sentences(doc);
  const auto got = textrank_scores(similarity_matrix(sents));
  const auto want = qgen_test::hub_oracle_scores();
  double err = 0.0;
  for (std::size_t i = 0; i < 3; ++i) err = std::max(err, std::abs(got[i] - want[i]));
  const auto top = textrank_summary(doc, 1);
  const bool hub_first = !top.empty() && top[0] == sents[1];
  return {sents.size() == 3 && hub_first && err < 1e-6,
          "scores " + fmt(got[0], 8) + " " + fmt(got[1], 8) + " " + fmt(got[2], 8) + ", max |diff| " + fmt(err, 3) +
              (hub_first ? ", hub ranked first" : ", hub NOT first")};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + QGEN_CLI + "\" " + args + " >>\"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome c9_cli() {
  const fs::path work = QGEN_WORKDIR;
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path cfg = work / "run.cfg", out = work / "out", log = work / "cli.log";
  std::ofstream(cfg) << "# reduced-epoch end-to-end run\n"
                     << "corpus=" << QGEN_FIXTURE << "\n"
                     << "split=train\nseed=3\nembed_dim=16\nhidden_dim=16\nheads=2\nlayers=1\nattn_dim=16\n"
                     << "epochs_typedist=20\nepochs_summarizer=4\nepochs_qgen=4\n";
  const std::vector<std::string> steps{"prepare", "train --stage typedist", "train --stage summarizer",
                                       "train --stage qgen", "generate", "evaluate"};
  auto run_all = [&]() -> std::string {
    for (const auto& s : steps) {
      const int code = run_cli("--config \"" + cfg.string() + "\" --out \"" + out.string() + "\" " + s, log);
      if (code != 0) return "`" + s + "` exited " + std::to_string(code) + " (see " + log.string() + ")";
    }
    return {};
  };
  if (auto err = run_all(); !err.empty()) return {false, err};

  nlohmann::json report;
  try {
    report = nlohmann::json::parse(slurp(out / "report.json"));
  } catch (const std::exception& e) {
    return {false, std::string("report.json unreadable: ") + e.what()};
  }
  bool fields = report.contains("type_kl") && report["type_kl"].is_number() && report.contains("run_config");
  std::set<std::string> protocols;
  for (const auto& p : report.value("protocols", nlohmann::json::array())) {
    for (const char* k : {"precision", "recall", "f1"}) fields = fields && p.contains(k) && p[k].is_number();
    protocols.insert(p.value("protocol", ""));
  }
  fields = fields && protocols == std::set<std::string>{"concat", "max_match"};

  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(out)) first[e.path().filename().string()] = slurp(e.path());
  if (auto err = run_all(); !err.empty()) return {false, "rerun: " + err};
  std::vector<std::string> differing;
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    const auto name = e.path().filename().string();
    ++compared;
    if (!first.contains(name) || first[name] != slurp(e.path())) differing.push_back(name);
  }
  const bool identical = differing.empty() && compared == first.size();
  std::string detail = std::string("exit 0 for all steps, report fields ") + (fields ? "present" : "MISSING") + ", " +
                       std::to_string(compared) + " artifacts " + (identical ? "byte-identical on rerun" : "differ:");
  for (const auto& d : differing) detail += " " + d;
  return {fields && identical, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient oracle", c1_gradients},
      {"rouge-l oracle equivalence", c2_rouge},
      {"count recovery round trip", c3_counts},
      {"type-distribution overfit", c4_typedist},
      {"pipeline overfit", c5_pipeline},
      {"silver-summary upper bound", c6_silver_upper_bound},
      {"decoder invariants", c7_decoder_invariants},
      {"textrank determinism", c8_textrank},
      {"end-to-end cli", c9_cli},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " C" << i + 1 << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
