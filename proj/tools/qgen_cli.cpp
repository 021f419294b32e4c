// qgen: prepare / train / generate / evaluate / gradcheck.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qgen/qgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qgen;

namespace {

constexpr const char* kOutEnv = "QGEN_OUT_DIR";

struct Context {
  RunConfig cfg;
  fs::path out;

  json run_config() const { return cfg.to_json(); }
  fs::path path(const std::string& name) const { return out / name; }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw DataError("cannot write " + p.string());
  f << text;
}

std::string jsonl(const json& header, const std::vector<json>& rows) {
  std::string s = json{{"run_config", header}}.dump() + "\n";
  for (const auto& r : rows) s += r.dump() + "\n";
  return s;
}

void write_document(const Context& ctx, const std::string& name, json body) {
  body["run_config"] = ctx.run_config();
  write_text(ctx.path(name), body.dump(1) + "\n");
}

// Checkpoints and loss curves -------------------------------------------------

std::string artifact_name(const std::string& stage, const std::string& variant, const char* kind) {
  return stage + (variant.empty() ? "" : "." + variant) + "." + kind + ".json";
}

json load_checkpoint(const Context& ctx, const std::string& stage, const std::string& variant = "") {
  const auto p = ctx.path(artifact_name(stage, variant, "ckpt"));
  if (!fs::exists(p)) {
    throw DataError("stage " + stage + ": missing checkpoint " + p.string() + " (run `qgen train --stage " + stage +
                    (variant.empty() ? "" : variant == "wo-tdl" ? " --mode wo-tdl" : " --mode per-type") +
                    "`)");
  }
  json j = read_json_file(p.string());
  if (j.value("stage", "") != stage) throw DataError(p.string() + ": not a " + stage + " checkpoint");
  return j.at("model");
}

Corpus load_prepared(const Context& ctx) {
  const auto p = ctx.path("corpus.filtered.jsonl");
  if (!fs::exists(p)) throw DataError("stage prepare: missing " + p.string() + " (run `qgen prepare` first)");
  return load_corpus(p.string());
}

Corpus split_of(const Corpus& c, const std::string& split) {
  Corpus s = c.only(*parse_split(split));
  if (s.paragraphs.empty()) throw DataError("no paragraphs in split " + split);
  return s;
}

void save_model(const Context& ctx, const std::string& stage, const std::string& variant, json model,
                std::vector<json> epochs) {
  write_document(ctx, artifact_name(stage, variant, "ckpt"), {{"stage", stage}, {"variant", variant}, {"model", model}});
  write_document(ctx, artifact_name(stage, variant, "loss"), {{"stage", stage}, {"variant", variant}, {"epochs", epochs}});
}

void progress(const std::string& name, int epoch, int total, double loss) {
  if ((epoch + 1) % 10 == 0 || epoch + 1 == total) {
    std::cerr << name << " epoch " << epoch + 1 << "/" << total << " loss " << loss << '\n';
  }
}

void train_seq2seq_stage(const Context& ctx, const std::string& stage, const std::string& variant,
                         const std::vector<Seq2SeqExample>& data, const std::vector<std::string>& specials,
                         int epochs, std::uint64_t model_seed) {
  if (data.empty()) throw DataError("stage " + stage + ": no training examples" + (variant.empty() ? "" : " for " + variant));
  Seq2SeqModel model(seq2seq_vocab(data, specials), ctx.cfg.dims(), model_seed);
  const std::string name = stage + (variant.empty() ? "" : "." + variant);
  const auto log = train_seq2seq(model, data, ctx.cfg.seq2seq_options(epochs),
                                 [&](const Seq2SeqEpoch& e) { progress(name, e.epoch, epochs, e.loss); });
  std::vector<json> rows;
  for (const auto& e : log) {
    rows.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"teacher_forcing", e.teacher_forcing}, {"lambda_cov", e.lambda_cov}});
  }
  save_model(ctx, stage, variant, model.to_json(), std::move(rows));
}

// Commands ------------------------------------------------------------------

void cmd_prepare(const Context& ctx) {
  if (ctx.cfg.corpus.empty()) throw DataError("prepare: no corpus path (set corpus= in the config)");
  const Corpus raw = load_corpus(ctx.cfg.corpus);
  const Corpus prepared = with_silver(filter_hcd(raw));
  if (prepared.paragraphs.empty()) throw DataError("prepare: no paragraph keeps an HCD question");
  std::vector<json> paragraphs, silver;
  for (const auto& p : prepared.paragraphs) {
    paragraphs.push_back(to_json(p));
    for (const auto& s : p.silver) {
      silver.push_back({{"paragraph_id", p.id},
                        {"qtype", to_string(s.qtype)},
                        {"order_index", s.order_index},
                        {"tokens", s.tokens},
                        {"flagged", s.flagged}});
    }
  }
  write_text(ctx.path("corpus.filtered.jsonl"), jsonl(ctx.run_config(), paragraphs));
  write_text(ctx.path("silver.jsonl"), jsonl(ctx.run_config(), silver));
  write_document(ctx, "stats.json", {{"stats", to_json(corpus_stats(prepared))}, {"input", to_json(corpus_stats(raw))}});
  std::cerr << "prepared " << prepared.paragraphs.size() << " paragraphs, " << silver.size() << " silver summaries\n";
}

void cmd_train(const Context& ctx, const std::string& stage) {
  const RunConfig& cfg = ctx.cfg;
  const Corpus train = split_of(load_prepared(ctx), "train");
  const auto tags = control_specials(cfg.order_tags);
  const bool per_type = cfg.mode == "per-type";
  // w/o type-distribution learning and the extractive baselines share untagged models.
  const bool untagged = cfg.mode != "pipeline" && !per_type && cfg.mode != "e2e";
  if (stage == "typedist") {
    TypeDistModel model(paragraph_vocab(train), cfg.typedist_config(), cfg.seed);
    const int epochs = cfg.epochs_typedist;
    TypeDistTrainOptions opt{epochs, cfg.lr_typedist, cfg.clip_norm, cfg.seed};
    std::vector<json> rows;
    for (const auto& e : train_typedist(model, train, opt)) {
      rows.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"mean_kl", e.mean_kl}});
      progress("typedist", e.epoch, epochs, e.loss);
    }
    save_model(ctx, "typedist", "", model.to_json(), std::move(rows));
  } else if (stage == "summarizer") {
    if (per_type) {
      for (auto t : kHcdTypes) {
        train_seq2seq_stage(ctx, stage, std::string(to_string(t)), summarizer_examples(train, cfg.order_tags, t), tags,
                            cfg.epochs_summarizer, cfg.seed + 1);
      }
    } else if (untagged) {
      train_seq2seq_stage(ctx, stage, "wo-tdl", untagged_summarizer_examples(train), {}, cfg.epochs_summarizer,
                          cfg.seed + 1);
    } else {
      train_seq2seq_stage(ctx, stage, "", summarizer_examples(train, cfg.order_tags), tags, cfg.epochs_summarizer,
                          cfg.seed + 1);
    }
  } else if (stage == "qgen") {
    if (per_type) {
      for (auto t : kHcdTypes) {
        train_seq2seq_stage(ctx, stage, std::string(to_string(t)), qgen_examples(train, cfg.order_tags, t), tags,
                            cfg.epochs_qgen, cfg.seed + 2);
      }
    } else if (untagged) {
      train_seq2seq_stage(ctx, stage, "wo-tdl", untagged_qgen_examples(train), {}, cfg.epochs_qgen, cfg.seed + 2);
    } else {
      train_seq2seq_stage(ctx, stage, "", qgen_examples(train, cfg.order_tags), tags, cfg.epochs_qgen, cfg.seed + 2);
    }
  } else if (stage == "e2e") {
    train_seq2seq_stage(ctx, stage, "", e2e_examples(train), {}, cfg.epochs_e2e, cfg.seed + 3);
  } else {
    throw CLI::ValidationError("--stage", "unknown stage " + stage);
  }
}

std::vector<json> untagged_records(const std::string& id, const std::vector<Tokens>& summaries,
                                   const std::vector<Tokens>& questions) {
  std::vector<json> r;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    r.push_back(generated_record(id, "summary", "none", static_cast<int>(i) + 1, summaries[i]));
  }
  for (std::size_t i = 0; i < questions.size(); ++i) {
    r.push_back(generated_record(id, "question", "none", static_cast<int>(i) + 1, questions[i]));
  }
  int order = 0;
  for (const auto& q : postfilter(questions)) r.push_back(generated_record(id, "final", "none", ++order, q));
  return r;
}

void cmd_generate(const Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const Corpus data = split_of(load_prepared(ctx), cfg.split);
  const std::string& mode = cfg.mode;
  std::vector<json> records, type_rows;
  const auto dist_path = ctx.path("typedist_eval.jsonl");

  if (mode == "pipeline" || mode == "per-type") {
    const auto td = TypeDistModel::from_json(load_checkpoint(ctx, "typedist"));
    std::map<std::string, Seq2SeqModel> summ, qg;
    for (auto t : kHcdTypes) {
      const std::string v = mode == "per-type" ? std::string(to_string(t)) : "";
      if (!summ.contains(v)) summ.emplace(v, Seq2SeqModel::from_json(load_checkpoint(ctx, "summarizer", v)));
      if (!qg.contains(v)) qg.emplace(v, Seq2SeqModel::from_json(load_checkpoint(ctx, "qgen", v)));
    }
    auto variant = [&](QuestionType t) { return mode == "per-type" ? std::string(to_string(t)) : std::string(); };
    PipelineModels models{
        [&](const ParsedParagraph& p) { return td.predict(p); },
        [&](const ControlSignal& c, const ParsedParagraph& p) {
          return summ.at(variant(c.type)).generate(controlled_paragraph_source(c, p, cfg.order_tags), cfg.max_summary_len);
        },
        [&](const ControlSignal& c, const Tokens& s) {
          return qg.at(variant(c.type)).generate(controlled_text_source(c, s, cfg.order_tags), cfg.max_question_len);
        }};
    for (const auto& p : data.paragraphs) {
      const auto out = run_pipeline(p, models, cfg.order_tags);
      for (auto& r : to_records(out)) records.push_back(std::move(r));
      const auto gold = p.hcd_counts();
      type_rows.push_back({{"paragraph_id", p.id},
                           {"true", append_pseudo_label(gold).probs},
                           {"predicted", out.distribution.probs},
                           {"gold_counts", gold},
                           {"recovered_counts", out.counts}});
    }
  } else if (mode == "e2e") {
    const auto model = Seq2SeqModel::from_json(load_checkpoint(ctx, "e2e"));
    for (const auto& p : data.paragraphs) {
      for (auto& r : untagged_records(p.id, {}, e2e_generate(p, model, cfg.e2e_max_len))) records.push_back(std::move(r));
    }
  } else {
    const auto qgen = Seq2SeqModel::from_json(load_checkpoint(ctx, "qgen", "wo-tdl"));
    std::optional<Seq2SeqModel> summarizer;
    if (mode == "wo-tdl") summarizer = Seq2SeqModel::from_json(load_checkpoint(ctx, "summarizer", "wo-tdl"));
    for (const auto& p : data.paragraphs) {
      std::vector<Tokens> summaries;
      if (summarizer) {
        summaries = split_statements(summarizer->generate(paragraph_source(p), cfg.max_summary_len), 2);
      } else if (mode == "textrank") {
        summaries = textrank_summary(p.tokens, 3);
      } else {
        summaries = extract_baseline(p.tokens, *parse_extract_mode(mode), cfg.seed);
      }
      std::vector<Tokens> questions;
      for (const auto& s : summaries) questions.push_back(qgen.generate(text_source(s), cfg.max_question_len));
      for (auto& r : untagged_records(p.id, summaries, questions)) records.push_back(std::move(r));
    }
  }
  write_text(ctx.path("generated.jsonl"), jsonl(ctx.run_config(), records));
  if (type_rows.empty()) {
    fs::remove(dist_path);
  } else {
    write_text(dist_path, jsonl(ctx.run_config(), type_rows));
  }
  std::cerr << "generated " << records.size() << " records for " << data.paragraphs.size() << " paragraphs\n";
}

std::vector<json> read_jsonl_rows(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::vector<json> rows;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      if (!j.contains("run_config")) rows.push_back(std::move(j));
    } catch (const json::exception& e) {
      throw DataError(p.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return rows;
}

void cmd_evaluate(const Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const Corpus data = split_of(load_prepared(ctx), cfg.split);
  const auto gen_path = ctx.path("generated.jsonl");
  if (!fs::exists(gen_path)) throw DataError("stage generate: missing " + gen_path.string());
  std::map<std::string, std::vector<Tokens>> generated;
  try {
    for (const auto& r : read_jsonl_rows(gen_path)) {
      if (r.at("stage") == "final") generated[r.at("paragraph_id").get<std::string>()].push_back(r.at("tokens").get<Tokens>());
    }
  } catch (const json::exception& e) {
    throw DataError(gen_path.string() + ": " + e.what());
  }
  const auto avg = cfg.max_match == "generated" ? MaxMatchAverage::over_generated : MaxMatchAverage::over_gold;
  std::vector<RougeScore> concat_scores, match_scores;
  json concat_rows = json::array(), match_rows = json::array();
  for (const auto& p : data.paragraphs) {
    std::vector<Tokens> gold;
    for (const auto& q : p.qa)
      if (is_hcd(q.qtype)) gold.push_back(q.question);
    if (gold.empty()) continue;
    const auto& gen = generated[p.id];
    concat_scores.push_back(concat_protocol(gen, gold));
    match_scores.push_back(max_match_protocol(gen, gold, avg));
    json row = to_json(concat_scores.back());
    row["paragraph_id"] = p.id;
    concat_rows.push_back(row);
    row = to_json(match_scores.back());
    row["paragraph_id"] = p.id;
    match_rows.push_back(row);
  }
  auto protocol = [&](const char* name, const std::vector<RougeScore>& xs, json rows) {
    json j = to_json(mean_score(xs));
    j["protocol"] = name;
    j["split"] = cfg.split;
    j["per_paragraph"] = std::move(rows);
    return j;
  };
  json report{{"protocols", {protocol("concat", concat_scores, concat_rows), protocol("max_match", match_scores, match_rows)}},
              {"max_match_average", cfg.max_match},
              {"type_kl", nullptr}};
  const auto dist_path = ctx.path("typedist_eval.jsonl");
  if (fs::exists(dist_path)) {
    std::map<std::string, std::vector<int>> gold;
    std::map<std::string, TypeDistribution> pred;
    try {
      for (const auto& r : read_jsonl_rows(dist_path)) {
        const auto id = r.at("paragraph_id").get<std::string>();
        gold[id] = r.at("gold_counts").get<std::vector<int>>();
        pred[id] = {r.at("predicted").get<std::vector<double>>()};
      }
    } catch (const json::exception& e) {
      throw DataError(dist_path.string() + ": " + e.what());
    }
    report["type_kl"] = type_kl_report(gold, pred);
  }
  write_document(ctx, "report.json", report);
  for (const auto& p : report["protocols"]) {
    std::cout << std::left << std::setw(10) << p["protocol"].get<std::string>() << " P " << p["precision"] << " R "
              << p["recall"] << " F1 " << p["f1"] << '\n';
  }
  std::cout << "type_kl " << report["type_kl"] << '\n';
}

int cmd_gradcheck() {
  const auto reg = full_registry();
  const auto rows = reg.run(100, 1e-6, 1e-4);
  bool ok = true;
  for (const auto& r : rows) {
    std::cout << std::left << std::setw(22) << r.name << std::scientific << std::setprecision(3) << r.max_error
              << "  " << (r.passed ? "PASS" : "FAIL") << '\n';
    ok = ok && r.passed;
  }
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Educational question generation: type distribution, event summaries, questions"};
  app.require_subcommand(1);
  std::string config_path, mode, stage, out;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "key=value run configuration");
  app.add_option("--seed", seed, "overrides seed");
  app.add_option("--mode", mode, "pipeline|per-type|wo-tdl|lead3|last3|random3|total|textrank|e2e");
  app.add_option("--out", out, "output directory (else $QGEN_OUT_DIR, else out= from the config)");
  auto* prepare = app.add_subcommand("prepare", "filter the corpus, build silver summaries and stats");
  auto* train = app.add_subcommand("train", "train one stage");
  train->add_option("--stage", stage, "typedist|summarizer|qgen|e2e")
      ->required()
      ->check(CLI::IsMember({"typedist", "summarizer", "qgen", "e2e"}));
  auto* generate = app.add_subcommand("generate", "generate questions for the configured split");
  auto* evaluate = app.add_subcommand("evaluate", "score generated questions against gold");
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every registered op");
  for (auto* sub : {prepare, train, generate, evaluate, gradcheck}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gradcheck->parsed()) return cmd_gradcheck();
    Context ctx;
    if (!config_path.empty()) ctx.cfg = load_config(config_path);
    if (seed) ctx.cfg.seed = *seed;
    if (!mode.empty()) ctx.cfg.mode = mode;
    if (const char* env = std::getenv(kOutEnv); env && *env) ctx.cfg.out = env;
    if (!out.empty()) ctx.cfg.out = out;
    ctx.cfg.validate();
    ctx.out = ctx.cfg.out;
    fs::create_directories(ctx.out);
    if (prepare->parsed()) cmd_prepare(ctx);
    if (train->parsed()) cmd_train(ctx, stage);
    if (generate->parsed()) cmd_generate(ctx);
    if (evaluate->parsed()) cmd_evaluate(ctx);
    return 0;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
