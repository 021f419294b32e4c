#include <gtest/gtest.h>

#include <random>

#include "qgen/pipeline.hpp"
#include "qgen/silver.hpp"
#include "test_util.hpp"

using namespace qgen;

namespace {

Tokens toks(const std::string& s) { return tokenize(s); }

ModelDims tiny_dims() { return {.embed = 8, .model = 8, .heads = 2, .layers = 1, .hidden = 16, .attn = 8}; }

// Fixed-output stand-ins for the three models.
PipelineModels stub_models(std::vector<int> counts) {
  PipelineModels m;
  m.predict_types = [counts](const ParsedParagraph&) { return append_pseudo_label(counts); };
  m.summarize = [](const ControlSignal& c, const ParsedParagraph& p) {
    return Tokens{p.id, std::string(to_string(c.type)), std::to_string(c.order), "."};
  };
  m.ask = [](const ControlSignal& c, const Tokens& summary) {
    Tokens q{"what", "about", summary[1]};
    if (c.order > 1) q.push_back(std::to_string(c.order));
    q.push_back("?");
    return q;
  };
  return m;
}

}  // namespace

TEST(ControlInput, Examples) {
  EXPECT_EQ(make_control_input(QuestionType::action, 1, {"a", "b"}), (Tokens{"<action>", "<first>", "a", "b"}));
  EXPECT_EQ(make_control_input(QuestionType::causal, 2, {}), (Tokens{"<causal>", "<second>"}));
  EXPECT_THROW(make_control_input(QuestionType::action, 4, {"a"}, 3), DataError);
  EXPECT_THROW(make_control_input(QuestionType::action, 0, {"a"}), DataError);
  EXPECT_THROW(make_control_input(QuestionType::character, 1, {"a"}), DataError);
  EXPECT_THROW(order_tag(1, 11), DataError);
  EXPECT_EQ(control_specials(3).size(), 6u);
}

TEST(ControlInput, ControlNodesReachEveryToken) {
  const auto src = controlled_paragraph_source({QuestionType::outcome, 1}, qgen_test::tiny_paragraph());
  ASSERT_EQ(src.tokens.size(), 5u);
  EXPECT_EQ(src.tokens[0], "<outcome>");
  for (std::size_t j = 0; j < 5; ++j) EXPECT_TRUE(src.adj(0, j) && src.adj(1, j));
  const auto empty = controlled_text_source({QuestionType::action, 2}, {});
  EXPECT_EQ(empty.tokens.size(), 2u);
  EXPECT_EQ(text_source({}).tokens, (Tokens{"<unk>"}));
}

TEST(ControlPlan, EnumerationOrderAndTruncation) {
  const std::vector<int> counts{2, 0, 1};
  const auto plan = control_plan(counts);
  ASSERT_EQ(plan.size(), 3u);
  EXPECT_EQ(plan[0].type, QuestionType::action);
  EXPECT_EQ(plan[0].order, 1);
  EXPECT_EQ(plan[1].type, QuestionType::action);
  EXPECT_EQ(plan[1].order, 2);
  EXPECT_EQ(plan[2].type, QuestionType::outcome);
  EXPECT_EQ(plan[2].order, 1);
  EXPECT_TRUE(control_plan(std::vector<int>{0, 0, 0}).empty());
  EXPECT_EQ(control_plan(std::vector<int>{7, 0, 0}).size(), 5u);
  EXPECT_THROW(control_plan(std::vector<int>{1, 1}), DataError);
  EXPECT_THROW(control_plan(std::vector<int>{1, -1, 0}), DataError);
}

TEST(Postfilter, Examples) {
  EXPECT_EQ(postfilter(std::vector<Tokens>{toks("what did x do ?"), toks("what did x do ?")}).size(), 1u);
  EXPECT_TRUE(postfilter(std::vector<Tokens>{{"a", "b"}}).empty());
  EXPECT_EQ(postfilter(std::vector<Tokens>{toks("why did x run ?")}).size(), 1u);
  std::vector<GeneratedItem> items(3);
  items[0].question = toks("why did x run ?");
  items[1].question = toks("why did x run ?");
  items[2].question = {"a", "b"};
  postfilter(items);
  EXPECT_TRUE(items[0].kept);
  EXPECT_FALSE(items[1].kept);
  EXPECT_FALSE(items[2].kept);
}

TEST(RunPipeline, StubCompositionEqualsManualChaining) {
  const auto p = qgen_test::tiny_paragraph("p7");
  const auto models = stub_models({2, 0, 1});
  const auto out = run_pipeline(p, models);
  EXPECT_EQ(out.counts, (std::vector<int>{2, 0, 1}));
  ASSERT_EQ(out.items.size(), 3u);
  const std::vector<ControlSignal> plan{{QuestionType::action, 1}, {QuestionType::action, 2}, {QuestionType::outcome, 1}};
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const Tokens s = models.summarize(plan[i], p);
    EXPECT_EQ(out.items[i].summary, s);
    EXPECT_EQ(out.items[i].question, models.ask(plan[i], s));
  }
  EXPECT_EQ(out.questions().size(), 3u);
  EXPECT_TRUE(run_pipeline(p, stub_models({0, 0, 0})).items.empty());
}

// Question count before filtering equals the recovered total.
TEST(RunPipeline, ItemCountEqualsRecoveredCounts) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> n(0, 5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::vector<int> counts{n(rng), n(rng), n(rng)};
    const auto out = run_pipeline(qgen_test::tiny_paragraph(), stub_models(counts));
    EXPECT_EQ(out.items.size(), static_cast<std::size_t>(counts[0] + counts[1] + counts[2]));
  }
}

TEST(RunPipeline, StageErrorsNameTheStage) {
  const auto p = qgen_test::tiny_paragraph();
  auto expect_stage = [&](const PipelineModels& m, const std::string& stage) {
    try {
      run_pipeline(p, m);
      ADD_FAILURE() << stage;
    } catch (const std::exception& e) {
      EXPECT_NE(std::string(e.what()).find("stage " + stage), std::string::npos) << e.what();
    }
  };
  auto m = stub_models({1, 0, 0});
  m.predict_types = [](const ParsedParagraph&) { return TypeDistribution{{0.5, 0.5, 0.0, 0.0}}; };
  expect_stage(m, "typedist");
  m = stub_models({1, 0, 0});
  m.summarize = [](const ControlSignal&, const ParsedParagraph&) -> Tokens { throw DataError("boom"); };
  expect_stage(m, "summarizer");
  m = stub_models({1, 0, 0});
  m.ask = [](const ControlSignal&, const Tokens&) -> Tokens { throw NumericError("nan"); };
  EXPECT_THROW(run_pipeline(p, m), NumericError);
  expect_stage(m, "qgen");
}

TEST(SplitQuestions, FirstTwo) {
  const auto q = split_questions(toks("q1 ? q2 ? q3 ?"));
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q[0], (Tokens{"q1", "?"}));
  EXPECT_EQ(q[1], (Tokens{"q2", "?"}));
  EXPECT_EQ(split_questions(toks("who ran ?")).size(), 1u);
  EXPECT_EQ(split_questions(toks("who ran ? and then")).back(), (Tokens{"and", "then"}));
  EXPECT_TRUE(split_questions({}).empty());
  EXPECT_EQ(split_statements(toks("a b . c . d .")).size(), 2u);
}

TEST(Records, SummaryQuestionAndFinalLines) {
  const auto out = run_pipeline(qgen_test::tiny_paragraph("p1"), stub_models({1, 0, 0}));
  const auto r = to_records(out);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0]["stage"], "summary");
  EXPECT_EQ(r[1]["stage"], "question");
  EXPECT_EQ(r[1]["kept"], true);
  EXPECT_EQ(r[2]["stage"], "final");
  for (const auto& j : r) {
    for (const char* k : {"paragraph_id", "stage", "qtype", "order", "tokens"}) EXPECT_TRUE(j.contains(k)) << k;
  }
}

TEST(Examples, BuildersFollowSilverAndQuestions) {
  const Corpus c = with_silver(filter_hcd(load_corpus(QGEN_FIXTURE)));
  std::size_t silver = 0;
  for (const auto& p : c.paragraphs) silver += p.silver.size();
  EXPECT_EQ(summarizer_examples(c).size(), silver);
  EXPECT_EQ(qgen_examples(c).size(), silver);
  EXPECT_EQ(untagged_qgen_examples(c).size(), silver);
  EXPECT_EQ(untagged_summarizer_examples(c).size(), c.paragraphs.size());
  EXPECT_EQ(e2e_examples(c).size(), c.paragraphs.size());
  std::size_t action = 0;
  for (const auto& p : c.paragraphs)
    for (const auto& s : p.silver) action += s.qtype == QuestionType::action;
  EXPECT_EQ(summarizer_examples(c, 5, QuestionType::action).size(), action);
  for (const auto& ex : qgen_examples(c)) EXPECT_EQ(ex.source.adj.n, ex.source.tokens.size());
}

TEST(Seq2Seq, CheckpointRoundTripAndOovCopyIds) {
  const std::vector<Seq2SeqExample> data{{text_source(toks("the fox ran .")), toks("who ran ?")}};
  Seq2SeqModel m(seq2seq_vocab(data, control_specials()), tiny_dims(), 3);
  const auto back = Seq2SeqModel::from_json(nlohmann::json::parse(m.to_json().dump()));
  EXPECT_EQ(back.generate(data[0].source, 5), m.generate(data[0].source, 5));
  auto j = m.to_json();
  j["params"]["params"].erase(0);
  EXPECT_THROW(Seq2SeqModel::from_json(j), DataError);

  const auto e = m.encode(text_source(toks("the zebra ran .")));
  ASSERT_EQ(e.oov, (Tokens{"zebra"}));
  EXPECT_EQ(e.memory.source_ids[1], m.vocab().size());
  const auto ids = m.target_ids(e, toks("zebra okapi"));
  EXPECT_EQ(ids, (std::vector<std::size_t>{m.vocab().size(), m.vocab().unk(), m.vocab().eos()}));
}

TEST(Seq2Seq, OverfitSinglePairE2E) {
  ParsedParagraph p = qgen_test::tiny_paragraph("e");
  const std::vector<Seq2SeqExample> data{{paragraph_source(p), toks("what did the dog do ? who ran ? why ?")}};
  Seq2SeqModel m(seq2seq_vocab(data, {}), tiny_dims(), 5);
  const auto log = train_seq2seq(m, data, {.epochs = 150, .lr = 1e-2, .seed = 2});
  EXPECT_LT(log.back().loss, log.front().loss);
  EXPECT_EQ(log[3].lambda_cov, 0.0);
  EXPECT_EQ(log[5].lambda_cov, 1.0);
  EXPECT_DOUBLE_EQ(log[10].teacher_forcing, 0.5);
  const auto q = e2e_generate(p, m);
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q[0], toks("what did the dog do ?"));
  EXPECT_EQ(q[1], toks("who ran ?"));
}

TEST(Seq2Seq, TrainingIsDeterministic) {
  const std::vector<Seq2SeqExample> data{{text_source(toks("a b c")), toks("c b")},
                                         {text_source(toks("b a")), toks("a")}};
  auto run = [&] {
    Seq2SeqModel m(seq2seq_vocab(data, {}), tiny_dims(), 7);
    train_seq2seq(m, data, {.epochs = 8});
    return m.to_json().dump();
  };
  EXPECT_EQ(run(), run());
  Seq2SeqModel m(seq2seq_vocab(data, {}), tiny_dims(), 7);
  EXPECT_THROW(train_seq2seq(m, {}, {}), DataError);
}
