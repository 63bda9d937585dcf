#include <gtest/gtest.h>

#include <sstream>

#include "fedsim/config.hpp"
#include "fedsim/error.hpp"

namespace fedsim {
namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

TEST(Config, DefaultsRoundTrip) {
  const ExperimentConfig cfg;
  const auto text = emit_config(cfg);
  EXPECT_EQ(parse(text), cfg);
  EXPECT_EQ(emit_config(parse(text)), text);
}

TEST(Config, EveryKeyIsEmittedAndReadable) {
  const ExperimentConfig cfg;
  const auto text = emit_config(cfg);
  for (const auto& key : config_keys()) {
    EXPECT_NE(text.find(key + " = "), std::string::npos) << key;
    EXPECT_NO_THROW(get_config_value(cfg, key)) << key;
  }
}

TEST(Config, ParsesValuesAndComments) {
  const auto cfg = parse(
      "# experiment\n"
      "dataset.kind = synthetic\n"
      "\n"
      "partition.kind = dirichlet   # skew\n"
      "partition.beta = 0.5\n"
      "clients.k = 40\n"
      "select.strategy = random\n"
      "select.rate = 0.2\n"
      "dp.enabled = true\n"
      "dp.epsilon = 1.5\n"
      "train.lr = 0.05\n"
      "model.kind = softmax\n"
      "run.seeds = 1,2,3\n");
  EXPECT_EQ(cfg.partition.kind, PartitionKind::kDirichlet);
  EXPECT_EQ(cfg.partition.beta, 0.5);
  EXPECT_EQ(cfg.num_clients, 40u);
  EXPECT_EQ(cfg.select.strategy, SelectorKind::kRandom);
  EXPECT_TRUE(cfg.dp.enabled);
  EXPECT_EQ(cfg.dp.epsilon, 1.5);
  EXPECT_EQ(cfg.train.lr, 0.05);
  EXPECT_EQ(cfg.model.kind, ModelKind::kSoftmaxRegression);
  EXPECT_EQ(cfg.run.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(cfg.cohort_size(), 8u);
  EXPECT_EQ(parse(emit_config(cfg)), cfg);
}

TEST(Config, NonDefaultRoundTripIsExact) {
  ExperimentConfig cfg;
  cfg.train.lr = 0.1 + 0.2;
  cfg.select.q_fraction = 1.0 / 3.0;
  cfg.run.outdir = "results/a";
  EXPECT_EQ(parse(emit_config(cfg)), cfg);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse("train.nonsense = 1\n"), ConfigError);
  EXPECT_THROW(parse("train.lr = fast\n"), ConfigError);
  EXPECT_THROW(parse("no equals sign\n"), ConfigError);
  EXPECT_THROW(parse("clients.k = -3\n"), ConfigError);
  EXPECT_THROW(parse("select.strategy = best\n"), ConfigError);
  EXPECT_THROW(parse_config_file("/nonexistent/fedsim.cfg"), Error);
}

TEST(Config, CohortSizeRounding) {
  ExperimentConfig cfg;
  cfg.num_clients = 25;
  cfg.select.rate = 0.1;
  EXPECT_EQ(cfg.cohort_size(), 3u);  // 2.5 rounds up
  cfg.select.rate = 0.001;
  EXPECT_EQ(cfg.cohort_size(), 1u);
  cfg.select.m = 7;
  EXPECT_EQ(cfg.cohort_size(), 7u);
}

TEST(Config, BufferCapacityValidation) {
  ExperimentConfig cfg;
  EXPECT_EQ(cfg.buffer_capacity(), 70u);
  EXPECT_NO_THROW(cfg.validate());
  cfg.select.q_fraction = 0.95;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.select.strategy = SelectorKind::kRandom;
  EXPECT_NO_THROW(cfg.validate());
  cfg.select.m = 101;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace fedsim
