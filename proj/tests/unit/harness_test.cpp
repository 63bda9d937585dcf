#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedsim/harness.hpp"
#include "fedsim/text.hpp"

namespace fedsim {
namespace {

namespace fs = std::filesystem;

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.dataset.synthetic = SyntheticSpec{4, 5, 30, 4.0};
  cfg.num_clients = 8;
  cfg.select.m = 2;
  cfg.select.q_fraction = 0.5;
  cfg.train.local_epochs = 1;
  cfg.train.batch_size = 8;
  cfg.train.lr = 0.05;
  cfg.train.rounds = 12;
  cfg.model.kind = ModelKind::kSoftmaxRegression;
  return cfg;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    for (auto c : split(line, ',')) cells.emplace_back(c);
    rows.push_back(std::move(cells));
  }
  return rows;
}

TEST(Harness, FederatedDataIsConsistent) {
  const auto cfg = small_config();
  const auto data = build_federated_data(cfg, 5);
  ASSERT_EQ(data.client_data.size(), 8u);
  std::size_t total = 0;
  for (std::size_t k = 0; k < 8; ++k) {
    const auto& counts = data.true_registry.counts(client_id(k));
    EXPECT_EQ(counts.total(), static_cast<double>(data.client_data[k].size()));
    total += data.client_data[k].size();
  }
  EXPECT_EQ(total, data.train.size());
  EXPECT_EQ(data.test.size(), 4u * 6);
}

TEST(Harness, DeterministicRuns) {
  const auto cfg = small_config();
  const auto a = run_experiment(cfg, std::nullopt);
  const auto b = run_experiment(cfg, std::nullopt);
  ASSERT_EQ(a.runs.size(), 1u);
  EXPECT_EQ(a.runs[0].rounds, b.runs[0].rounds);
  EXPECT_EQ(a.runs[0].rounds.size(), 12u);
}

TEST(Harness, WritesFilesWhoseSummaryRecomputes) {
  auto cfg = small_config();
  cfg.run.seeds = {1, 2, 3};
  const fs::path dir = fs::temp_directory_path() / "fedsim_harness_test";
  fs::remove_all(dir);
  const auto report = run_experiment(cfg, dir);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 4u);

  const auto summary = read_csv(dir / "summary.csv");
  ASSERT_EQ(summary.size(), 5u);
  EXPECT_EQ(summary[0], (std::vector<std::string>{"seed", "last10_mean_accuracy",
                                                  "last10_std_accuracy"}));
  for (std::size_t s = 0; s < 3; ++s) {
    const auto rows = read_csv(dir / ("metrics_seed" + std::to_string(s + 1) + ".csv"));
    ASSERT_EQ(rows.size(), 13u);
    EXPECT_EQ(rows[0].size(), 8u);
    EXPECT_EQ(rows[0][0], "round");
    double sum = 0.0;
    std::vector<double> acc;
    for (std::size_t r = 3; r < 13; ++r) acc.push_back(std::stod(rows[r][5]));
    for (double a : acc) sum += a;
    const double mean = sum / 10.0;
    double var = 0.0;
    for (double a : acc) var += (a - mean) * (a - mean);
    EXPECT_NEAR(std::stod(summary[s + 1][1]), mean, 1e-6);
    EXPECT_NEAR(std::stod(summary[s + 1][2]), std::sqrt(var / 10.0), 1e-6);
    EXPECT_NEAR(report.runs[s].summary.mean_accuracy, mean, 1e-6);
  }
  EXPECT_EQ(summary[4][0], "all");
  fs::remove_all(dir);
}

TEST(Harness, LoggedEntropyMatchesCohortCounts) {
  const auto cfg = small_config();
  auto state = init_experiment(cfg, 9);
  for (std::size_t t = 0; t < 4; ++t) {
    const auto m = run_round(state, t);
    std::vector<LabelCounts> members;
    for (auto id : m.cohort) members.push_back(state.data.registry.counts(id));
    EXPECT_NEAR(m.entropy_bits, entropy_bits(normalize(aggregate_counts(members))), 1e-12);
    EXPECT_EQ(m.entropy_bits, m.entropy_true_bits);
    EXPECT_NEAR(m.lr, cfg.train.round_lr(t), 1e-15);
  }
}

TEST(Harness, ShortRunSummarizesAllRounds) {
  std::vector<RoundMetrics> rounds(3);
  rounds[0].test_accuracy = 0.2;
  rounds[1].test_accuracy = 0.4;
  rounds[2].test_accuracy = 0.6;
  const auto s = summarize_seed(4, rounds);
  EXPECT_NEAR(s.mean_accuracy, 0.4, 1e-15);
  EXPECT_NEAR(s.std_accuracy, std::sqrt(0.08 / 3.0), 1e-15);
}

TEST(SelectTrace, FullParticipationMakesStrategiesEqual) {
  Rng rng(10);
  std::vector<LabelCounts> counts;
  for (std::size_t k = 0; k < 6; ++k) {
    std::vector<double> v(4);
    for (auto& x : v) x = 1.0 + static_cast<double>(rng.uniform_index(9));
    counts.emplace_back(v, client_id(k));
  }
  const ClientRegistry reg(counts);
  const auto report = select_trace(reg, 6, 0, 5, 1);
  ASSERT_EQ(report.fedentopt.rounds.size(), 5u);
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_EQ(report.fedentopt.rounds[t].cohort_entropy_bits,
              report.random.rounds[t].cohort_entropy_bits);
  }
  std::ostringstream out;
  write_entropy_by_round_csv(out, report);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "round,fedentopt_bits,random_bits");
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 5u);
}

TEST(SelectTrace, FedEntOptBeatsRandomOnLabelSkew) {
  ExperimentConfig cfg;
  cfg.dataset.synthetic.per_class = 20;
  const auto report = select_trace(cfg, 30, 1);
  double fe = 0.0, rnd = 0.0;
  for (std::size_t t = 0; t < 30; ++t) {
    fe += report.fedentopt.rounds[t].cohort_entropy_bits;
    rnd += report.random.rounds[t].cohort_entropy_bits;
  }
  EXPECT_GT(fe, rnd);
}

}  // namespace
}  // namespace fedsim
