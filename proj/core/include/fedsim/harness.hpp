#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fedsim/config.hpp"
#include "fedsim/dataset.hpp"
#include "fedsim/model.hpp"
#include "fedsim/partition.hpp"
#include "fedsim/selection.hpp"
#include "fedsim/training.hpp"

namespace fedsim {

// Rounds averaged for the end-of-run summary.
inline constexpr std::size_t kSummaryWindow = 10;

// Pooled data, its partition and the registries derived from it.
struct FederatedData {
  Dataset train;
  Dataset test;
  Partition partition;
  std::vector<Dataset> client_data;  // rows in ascending pooled index order
  ClientRegistry true_registry;      // evaluation only
  ClientRegistry registry;           // what selection sees (noised under DP)
};

// Builds data, partition, counts and (optionally privatized) registry for
// one seed. Streams are keyed by (seed, purpose, round, client).
FederatedData build_federated_data(const ExperimentConfig& cfg, std::uint64_t seed);

struct ExperimentState {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  FederatedData data;
  ModelSpec model;
  ModelParams global;
  SelectionState selection;
  std::vector<RoundMetrics> log;
};

// Validates the config, builds the federated data and initializes the model.
ExperimentState init_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

// One communication round: select, train each cohort member from the current
// global model at lr * decay^t, aggregate by true local sample counts,
// evaluate on the test set. Appends to and returns the log entry.
RoundMetrics run_round(ExperimentState& state, std::size_t round);

struct SeedSummary {
  std::uint64_t seed = 0;
  double mean_accuracy = 0.0;  // over the last kSummaryWindow rounds
  double std_accuracy = 0.0;   // population std over the same rounds
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<RoundMetrics> rounds;
  SeedSummary summary;
};

struct ExperimentReport {
  std::vector<SeedRun> runs;
  // Pooled over the last-window accuracies of every seed.
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

// Summary of the last min(kSummaryWindow, rounds) accuracies.
SeedSummary summarize_seed(std::uint64_t seed, std::span<const RoundMetrics> rounds);

// Runs every seed. If `outdir` is set, writes metrics_seed<S>.csv per seed
// and summary.csv there (creating the directory). Throws IoError with the
// offending path when a file cannot be written.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::optional<std::filesystem::path>& outdir);

// "round,selector,cohort,entropy_bits,entropy_true_bits,test_accuracy,test_loss,lr"
void write_metrics_csv(std::ostream& out, std::span<const RoundMetrics> rounds);
void write_summary_csv(std::ostream& out, const ExperimentReport& report);

struct TraceRun {
  SelectorKind selector;
  std::vector<SelectionResult> rounds;
};

struct SelectTraceReport {
  TraceRun fedentopt{SelectorKind::kFedEntOpt, {}};
  TraceRun random{SelectorKind::kRandom, {}};
};

// Runs only the selection loop for both strategies on the same registry,
// with the same per-round selection streams as a training run.
SelectTraceReport select_trace(const ExperimentConfig& cfg, std::size_t rounds,
                               std::uint64_t seed);
// Selection-only variant on an existing registry.
SelectTraceReport select_trace(const ClientRegistry& registry, std::size_t cohort_size,
                               std::size_t buffer_capacity, std::size_t rounds,
                               std::uint64_t seed);

// "round,fedentopt_bits,random_bits"
void write_entropy_by_round_csv(std::ostream& out, const SelectTraceReport& report);

struct SweepGrid {
  std::vector<SelectorKind> selectors;
  std::vector<double> rates;
  std::vector<std::optional<double>> epsilons;  // nullopt = DP off
};

struct SweepPoint {
  SelectorKind selector;
  double rate = 0.0;
  std::optional<double> epsilon;
  ExperimentReport report;
};

// Cartesian product of the grid over `base`; each point writes into its own
// subdirectory of `outdir` and a sweep_summary.csv is written at the top.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, const SweepGrid& grid,
                                  const std::optional<std::filesystem::path>& outdir);

}  // namespace fedsim
