#include <gtest/gtest.h>

#include <sstream>

#include "qgen/config.hpp"

using namespace qgen;

TEST(RunConfig, DefaultsAreValid) {
  const RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.gamma, 0.7);
  EXPECT_EQ(c.order_tags, 5u);
  EXPECT_EQ(c.e2e_max_len, 100u);
  EXPECT_EQ(c.mode, "pipeline");
}

TEST(RunConfig, ParsesKeyValueWithCommentsAndBlankLines) {
  std::istringstream in("# run\n\nseed = 9\ngamma=0.5\nmode = e2e\nepochs_qgen=3\nlr_seq2seq=1e-2\n");
  const RunConfig c = parse_config(in);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.gamma, 0.5);
  EXPECT_EQ(c.mode, "e2e");
  EXPECT_EQ(c.epochs_qgen, 3);
  EXPECT_EQ(c.lr_seq2seq, 1e-2);
}

TEST(RunConfig, ErrorsCarryLineNumbers) {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_config(in, "run.cfg");
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("seed=1\nbogus_key=2\n").find("run.cfg:2"), std::string::npos);
  EXPECT_NE(message("seed=1\nseed=abc\n").find("run.cfg:2"), std::string::npos);
  EXPECT_NE(message("just words\n").find("expected key=value"), std::string::npos);
  EXPECT_NE(message("seed=1x\n").find("seed"), std::string::npos);
  EXPECT_THROW(load_config("/nonexistent/run.cfg"), DataError);
}

TEST(RunConfig, ValidateRejectsBadValues) {
  auto bad = [](const std::string& key, const std::string& value) {
    RunConfig c;
    c.set(key, value);
    EXPECT_THROW(c.validate(), DataError) << key << "=" << value;
  };
  bad("mode", "summarize-everything");
  bad("gamma", "1.5");
  bad("hidden_dim", "30");
  bad("order_tags", "11");
  bad("max_match", "best");
  bad("split", "dev");
  bad("tf_floor", "-0.1");
  bad("max_question_len", "0");
  for (const auto& m : known_modes()) {
    RunConfig c;
    c.set("mode", m);
    EXPECT_NO_THROW(c.validate()) << m;
  }
}

TEST(RunConfig, JsonHoldsEveryKeyAndRoundTripsThroughSet) {
  RunConfig a;
  a.set("seed", "4");
  a.set("corpus", "data/x.jsonl");
  const auto j = a.to_json();
  RunConfig b;
  for (const auto& [k, v] : j.items()) b.set(k, v.is_string() ? v.get<std::string>() : v.dump());
  EXPECT_EQ(b.to_json(), j);
  EXPECT_EQ(j["corpus"], "data/x.jsonl");
}

TEST(RunConfig, DerivedOptions) {
  RunConfig c;
  c.set("hidden_dim", "32");
  c.set("heads", "2");
  c.set("coverage_start_epoch", "3");
  const auto d = c.dims();
  EXPECT_EQ(d.model, 32u);
  EXPECT_EQ(d.hidden, 32u);
  EXPECT_EQ(c.typedist_config().encoder.heads, 2u);
  const auto o = c.seq2seq_options(7);
  EXPECT_EQ(o.epochs, 7);
  EXPECT_EQ(o.coverage_start_epoch, 3);
  EXPECT_EQ(o.seed, c.seed);
}
