#include <gtest/gtest.h>

#include "codec/config.h"
#include "codec/error.h"

using namespace codec;

TEST(Config, DefaultsAreValid) {
  RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.dim, 16u);
  EXPECT_EQ(cfg.optimizer, Optimizer::kGradientAscent);
  EXPECT_DOUBLE_EQ(cfg.learning_rate, 0.001);
}

TEST(Config, ParseWithCommentsAndBlankLines) {
  const auto cfg = parse_config(
      "# run\n"
      "dim = 32\n"
      "\n"
      "lr=0.03   # faster\n"
      "optimizer=adam\n"
      "corpus = data/c.jsonl\n");
  EXPECT_EQ(cfg.dim, 32u);
  EXPECT_DOUBLE_EQ(cfg.learning_rate, 0.03);
  EXPECT_EQ(cfg.optimizer, Optimizer::kAdam);
  EXPECT_EQ(cfg.corpus, "data/c.jsonl");
  EXPECT_EQ(cfg.steps, RunConfig{}.steps);
}

TEST(Config, TextRoundTrip) {
  RunConfig cfg;
  cfg.dim = 7;
  cfg.seed = 123456789012345ULL;
  cfg.learning_rate = 0.1 + 0.2;
  cfg.optimizer = Optimizer::kAdam;
  cfg.index = "x.cdxi";
  EXPECT_EQ(parse_config(cfg.to_text()), cfg);
}

TEST(Config, ErrorsNameTheLine) {
  try {
    parse_config("dim=4\nbogus=1\n");
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
  EXPECT_THROW(parse_config("dim=four\n"), UsageError);
  EXPECT_THROW(parse_config("just words\n"), UsageError);
  EXPECT_THROW(parse_config("optimizer=rmsprop\n"), UsageError);
}

TEST(Config, ValidateRejectsZeroes) {
  for (const char* bad : {"dim=0", "lr=0", "z_samples=0", "mc_n=0", "index_mc=0", "shards=0", "k=0",
                          "clip_norm=-1"}) {
    const auto cfg = parse_config(bad);
    EXPECT_THROW(cfg.validate(), UsageError) << bad;
  }
}

TEST(Config, TrainConfigCarriesFields) {
  const auto cfg = parse_config("lr=0.5\nsteps=9\nbatch_size=3\nz_samples=2\nseed=4\nclip_norm=2\n");
  const auto t = cfg.train_config();
  EXPECT_DOUBLE_EQ(t.learning_rate, 0.5);
  EXPECT_EQ(t.steps, 9u);
  EXPECT_EQ(t.batch_size, 3u);
  EXPECT_EQ(t.z_samples, 2u);
  EXPECT_EQ(t.seed, 4u);
  EXPECT_DOUBLE_EQ(t.clip_norm, 2.0);
}
