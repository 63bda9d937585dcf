#include "fedsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string>

#include "fedsim/error.hpp"
#include "fedsim/privacy.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/text.hpp"

namespace fedsim {
namespace {

TrainTestSplit load_split(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.dataset.kind == DatasetKind::kCifar10) return load_cifar10_dir(cfg.dataset.path);
  SyntheticSpec test_spec = cfg.dataset.synthetic;
  // Test set is one fifth of the train size per class, as in CIFAR-10.
  test_spec.per_class = std::max<std::size_t>(1, cfg.dataset.synthetic.per_class / 5);
  return {gen_synthetic(cfg.dataset.synthetic, derive_seed(seed, StreamPurpose::kTrainData)),
          gen_synthetic(test_spec, derive_seed(seed, StreamPurpose::kTestData))};
}

PartitionSpec partition_spec(const ExperimentConfig& cfg, std::uint64_t seed) {
  PartitionSpec spec;
  spec.num_clients = cfg.num_clients;
  spec.seed = derive_seed(seed, StreamPurpose::kPartition);
  if (cfg.partition.kind == PartitionKind::kQuantity) {
    spec.kind = QuantitySkew{cfg.partition.labels_per_client};
  } else {
    spec.kind = DirichletSkew{cfg.partition.beta};
  }
  return spec;
}

std::string cohort_field(std::span<const ClientId> cohort) {
  std::string out;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    if (i > 0) out += ';';
    out += std::to_string(to_index(cohort[i]));
  }
  return out;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

FederatedData build_federated_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  auto [train, test] = load_split(cfg, seed);
  const std::size_t classes = train.num_classes();
  Partition partition = make_partition(train.labels(), classes, partition_spec(cfg, seed));

  std::vector<Dataset> client_data;
  client_data.reserve(partition.num_clients());
  for (const auto& rows : partition.assignment) {
    std::vector<std::size_t> sorted = rows;
    std::sort(sorted.begin(), sorted.end());
    client_data.push_back(train.subset(sorted));
  }

  auto true_counts = counts_from_partition(partition, train.labels(), classes);
  std::vector<LabelCounts> visible = true_counts;
  if (cfg.dp.enabled) {
    const PrivacyBudget budget(cfg.dp.epsilon);
    for (std::size_t k = 0; k < visible.size(); ++k) {
      Rng rng = Rng::stream(seed, StreamPurpose::kPrivacy, 0, k);
      visible[k] = privatize_counts(true_counts[k], budget, rng);
    }
  }
  return FederatedData{std::move(train),
                       std::move(test),
                       std::move(partition),
                       std::move(client_data),
                       ClientRegistry(std::move(true_counts)),
                       ClientRegistry(std::move(visible))};
}

ExperimentState init_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  FederatedData data = build_federated_data(cfg, seed);
  ModelSpec model{cfg.model.kind, data.train.num_features(), data.train.num_classes(),
                  cfg.model.kind == ModelKind::kMlp ? cfg.model.hidden : 0};
  Rng init_rng = Rng::stream(seed, StreamPurpose::kModelInit);
  ModelParams global = init_params(model, init_rng);
  SelectionState selection;
  selection.capacity = cfg.buffer_capacity();

  ExperimentConfig resolved = cfg;
  resolved.train.cohort_size = cfg.cohort_size();
  resolved.train.seed = seed;
  return ExperimentState{std::move(resolved), seed, std::move(data), model, std::move(global),
                         std::move(selection), {}};
}

RoundMetrics run_round(ExperimentState& state, std::size_t round) {
  const auto& cfg = state.config;
  const std::size_t m = cfg.train.cohort_size;
  try {
    Rng select_rng = Rng::stream(state.seed, StreamPurpose::kSelection, round);
    SelectionResult selected;
    if (cfg.select.strategy == SelectorKind::kFedEntOpt) {
      auto outcome = select_fedentopt(state.data.registry, m, state.selection, select_rng);
      selected = std::move(outcome.result);
      state.selection = std::move(outcome.state);
    } else {
      selected = select_random(state.data.registry, m, select_rng);
    }

    const double lr = cfg.train.round_lr(round);
    std::vector<ClientUpdate> updates;
    updates.reserve(selected.cohort.size());
    for (ClientId id : selected.cohort) {
      const Dataset& local = state.data.client_data[to_index(id)];
      Rng train_rng = Rng::stream(state.seed, StreamPurpose::kLocalTrain, round, to_index(id));
      try {
        updates.push_back(
            {id, local_train(state.model, state.global, local, cfg.train, lr, train_rng),
             local.size()});
      } catch (const Error& e) {
        rethrow_with_context(e, "client " + std::to_string(to_index(id)));
      }
    }
    state.global = aggregate_params(updates);
    const EvalResult eval = evaluate(state.model, state.global, state.data.test);

    RoundMetrics metrics;
    metrics.round = round;
    metrics.selector = std::string(to_string(cfg.select.strategy));
    metrics.cohort = selected.cohort;
    metrics.entropy_bits = selected.cohort_entropy_bits;
    metrics.entropy_true_bits = cohort_entropy_bits(state.data.true_registry, selected.cohort);
    metrics.test_accuracy = eval.accuracy;
    metrics.test_loss = eval.mean_loss;
    metrics.lr = lr;
    state.log.push_back(metrics);
    return metrics;
  } catch (const Error& e) {
    rethrow_with_context(e, "round " + std::to_string(round));
  }
}

SeedSummary summarize_seed(std::uint64_t seed, std::span<const RoundMetrics> rounds) {
  SeedSummary s;
  s.seed = seed;
  if (rounds.empty()) return s;
  const std::size_t window = std::min(kSummaryWindow, rounds.size());
  const auto tail = rounds.subspan(rounds.size() - window);
  double sum = 0.0;
  for (const auto& r : tail) sum += r.test_accuracy;
  s.mean_accuracy = sum / static_cast<double>(window);
  double ss = 0.0;
  for (const auto& r : tail) ss += (r.test_accuracy - s.mean_accuracy) * (r.test_accuracy - s.mean_accuracy);
  s.std_accuracy = std::sqrt(ss / static_cast<double>(window));
  return s;
}

void write_metrics_csv(std::ostream& out, std::span<const RoundMetrics> rounds) {
  out << "round,selector,cohort,entropy_bits,entropy_true_bits,test_accuracy,test_loss,lr\n";
  for (const auto& r : rounds) {
    out << r.round << ',' << r.selector << ',' << cohort_field(r.cohort) << ','
        << fixed6(r.entropy_bits) << ',' << fixed6(r.entropy_true_bits) << ','
        << fixed6(r.test_accuracy) << ',' << fixed6(r.test_loss) << ',' << fixed6(r.lr) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ExperimentReport& report) {
  out << "seed,last10_mean_accuracy,last10_std_accuracy\n";
  for (const auto& run : report.runs) {
    out << run.seed << ',' << fixed6(run.summary.mean_accuracy) << ','
        << fixed6(run.summary.std_accuracy) << '\n';
  }
  out << "all," << fixed6(report.mean_accuracy) << ',' << fixed6(report.std_accuracy) << '\n';
}

ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::optional<std::filesystem::path>& outdir) {
  cfg.validate();
  if (outdir) {
    std::error_code ec;
    std::filesystem::create_directories(*outdir, ec);
    if (ec) throw IoError("cannot create " + outdir->string() + ": " + ec.message());
  }

  ExperimentReport report;
  std::vector<double> pooled;
  for (std::uint64_t seed : cfg.run.seeds) {
    ExperimentState state = init_experiment(cfg, seed);
    for (std::size_t t = 0; t < cfg.train.rounds; ++t) run_round(state, t);

    SeedRun run{seed, std::move(state.log), {}};
    run.summary = summarize_seed(seed, run.rounds);
    const std::size_t window = std::min(kSummaryWindow, run.rounds.size());
    for (std::size_t i = run.rounds.size() - window; i < run.rounds.size(); ++i) {
      pooled.push_back(run.rounds[i].test_accuracy);
    }
    if (outdir) {
      const auto path = *outdir / ("metrics_seed" + std::to_string(seed) + ".csv");
      auto out = open_for_write(path);
      write_metrics_csv(out, run.rounds);
      check_written(out, path);
    }
    report.runs.push_back(std::move(run));
  }

  if (!pooled.empty()) {
    double sum = 0.0;
    for (double a : pooled) sum += a;
    report.mean_accuracy = sum / static_cast<double>(pooled.size());
    double ss = 0.0;
    for (double a : pooled) ss += (a - report.mean_accuracy) * (a - report.mean_accuracy);
    report.std_accuracy = std::sqrt(ss / static_cast<double>(pooled.size()));
  }
  if (outdir) {
    const auto path = *outdir / "summary.csv";
    auto out = open_for_write(path);
    write_summary_csv(out, report);
    check_written(out, path);
  }
  return report;
}

SelectTraceReport select_trace(const ClientRegistry& registry, std::size_t cohort_size,
                               std::size_t buffer_capacity, std::size_t rounds,
                               std::uint64_t seed) {
  SelectTraceReport report;
  SelectionState state;
  state.capacity = buffer_capacity;
  for (std::size_t t = 0; t < rounds; ++t) {
    Rng ent_rng = Rng::stream(seed, StreamPurpose::kSelection, t);
    auto outcome = select_fedentopt(registry, cohort_size, state, ent_rng);
    state = std::move(outcome.state);
    report.fedentopt.rounds.push_back(std::move(outcome.result));

    Rng rand_rng = Rng::stream(seed, StreamPurpose::kSelection, t);
    report.random.rounds.push_back(select_random(registry, cohort_size, rand_rng));
  }
  return report;
}

SelectTraceReport select_trace(const ExperimentConfig& cfg, std::size_t rounds,
                               std::uint64_t seed) {
  ExperimentConfig check = cfg;
  check.select.strategy = SelectorKind::kFedEntOpt;
  check.validate();
  const FederatedData data = build_federated_data(cfg, seed);
  return select_trace(data.registry, cfg.cohort_size(), cfg.buffer_capacity(), rounds, seed);
}

void write_entropy_by_round_csv(std::ostream& out, const SelectTraceReport& report) {
  out << "round,fedentopt_bits,random_bits\n";
  for (std::size_t t = 0; t < report.fedentopt.rounds.size(); ++t) {
    out << t << ',' << fixed6(report.fedentopt.rounds[t].cohort_entropy_bits) << ','
        << fixed6(report.random.rounds[t].cohort_entropy_bits) << '\n';
  }
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, const SweepGrid& grid,
                                  const std::optional<std::filesystem::path>& outdir) {
  std::vector<SweepPoint> points;
  for (SelectorKind selector : grid.selectors) {
    for (double rate : grid.rates) {
      for (const auto& epsilon : grid.epsilons) {
        ExperimentConfig cfg = base;
        cfg.select.strategy = selector;
        cfg.select.m = 0;
        cfg.select.rate = rate;
        cfg.dp.enabled = epsilon.has_value();
        if (epsilon) cfg.dp.epsilon = *epsilon;
        std::optional<std::filesystem::path> point_dir;
        if (outdir) {
          std::string name = std::string(to_string(selector)) + "_rate" + fixed6(rate) + "_" +
                             (epsilon ? "eps" + fixed6(*epsilon) : std::string("nodp"));
          point_dir = *outdir / name;
        }
        points.push_back({selector, rate, epsilon, run_experiment(cfg, point_dir)});
      }
    }
  }
  if (outdir) {
    const auto path = *outdir / "sweep_summary.csv";
    auto out = open_for_write(path);
    out << "selector,rate,dp_epsilon,mean_accuracy,std_accuracy\n";
    for (const auto& p : points) {
      out << to_string(p.selector) << ',' << fixed6(p.rate) << ','
          << (p.epsilon ? fixed6(*p.epsilon) : std::string("off")) << ','
          << fixed6(p.report.mean_accuracy) << ',' << fixed6(p.report.std_accuracy) << '\n';
    }
    check_written(out, path);
  }
  return points;
}

}  // namespace fedsim
