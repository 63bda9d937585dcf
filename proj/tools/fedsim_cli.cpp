#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedsim/config.hpp"
#include "fedsim/error.hpp"
#include "fedsim/harness.hpp"
#include "fedsim/text.hpp"

namespace {

using namespace fedsim;
namespace fs = std::filesystem;

struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> values;
};

void add_config_flags(CLI::App& cmd, ConfigFlags& flags) {
  cmd.add_option("--config", flags.file, "Config file of `key = value` lines");
  for (const auto& key : config_keys()) {
    cmd.add_option("--" + key, flags.values[key], "Overrides " + key + " from the config file");
  }
}

ExperimentConfig resolve_config(const CLI::App& cmd, const ConfigFlags& flags) {
  ExperimentConfig cfg = flags.file.empty() ? ExperimentConfig{} : parse_config_file(flags.file);
  for (const auto& [key, value] : flags.values) {
    if (cmd.count("--" + key) > 0) set_config_value(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_counts_csv(const fs::path& path, const ClientRegistry& registry, bool integral) {
  auto out = open_output(path);
  out << "client_id";
  for (std::size_t c = 0; c < registry.num_classes(); ++c) out << ",c" << c;
  out << '\n';
  for (const auto& counts : registry.all()) {
    out << to_index(counts.id());
    for (double v : counts.counts()) {
      out << ',';
      if (integral) {
        out << static_cast<long long>(v);
      } else {
        out << fixed6(v);
      }
    }
    out << '\n';
  }
}

void write_config_copy(const fs::path& dir, const ExperimentConfig& cfg) {
  auto out = open_output(dir / "config.cfg");
  out << emit_config(cfg);
}

void run_partition(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.run.outdir;
  fs::create_directories(dir);
  for (auto seed : cfg.run.seeds) {
    const auto data = build_federated_data(cfg, seed);
    const std::string tag = "_seed" + std::to_string(seed);
    auto part = open_output(dir / ("partition" + tag + ".tsv"));
    write_partition(part, data.partition);
    write_counts_csv(dir / ("counts" + tag + ".csv"), data.true_registry, true);
    if (cfg.dp.enabled) write_counts_csv(dir / ("noised_counts" + tag + ".csv"), data.registry, false);
  }
  write_config_copy(dir, cfg);
}

void run_select_trace(const ExperimentConfig& cfg, std::size_t rounds) {
  const fs::path dir = cfg.run.outdir;
  fs::create_directories(dir);
  for (auto seed : cfg.run.seeds) {
    const auto report = select_trace(cfg, rounds, seed);
    const std::string tag = "_seed" + std::to_string(seed);
    auto entropy = open_output(dir / ("entropy_by_round" + tag + ".csv"));
    write_entropy_by_round_csv(entropy, report);
    for (const auto* run : {&report.fedentopt, &report.random}) {
      auto out = open_output(dir / ("selection_" + std::string(to_string(run->selector)) + tag + ".csv"));
      write_selection_trace_header(out);
      for (std::size_t t = 0; t < run->rounds.size(); ++t) append_selection_trace(out, t, run->rounds[t]);
    }
  }
  write_config_copy(dir, cfg);
}

void run_train(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.run.outdir;
  const auto report = run_experiment(cfg, dir);
  write_config_copy(dir, cfg);
  for (const auto& run : report.runs) {
    std::printf("seed %llu: last-%zu accuracy %.4f +/- %.4f\n",
                static_cast<unsigned long long>(run.seed), kSummaryWindow,
                run.summary.mean_accuracy, run.summary.std_accuracy);
  }
  std::printf("all seeds: %.4f +/- %.4f\n", report.mean_accuracy, report.std_accuracy);
}

SelectorKind parse_selector(const std::string& s) {
  if (s == "fedentopt") return SelectorKind::kFedEntOpt;
  if (s == "random") return SelectorKind::kRandom;
  throw ConfigError("unknown selector '" + s + "'");
}

void run_sweep_command(const ExperimentConfig& cfg, const std::vector<std::string>& selectors,
                       const std::vector<double>& rates, const std::vector<std::string>& epsilons) {
  SweepGrid grid;
  for (const auto& s : selectors) grid.selectors.push_back(parse_selector(s));
  grid.rates = rates;
  for (const auto& e : epsilons) {
    if (e == "off") {
      grid.epsilons.push_back(std::nullopt);
    } else {
      try {
        grid.epsilons.push_back(std::stod(e));
      } catch (const std::exception&) {
        throw ConfigError("bad epsilon '" + e + "', expected a number or 'off'");
      }
    }
  }
  const fs::path dir = cfg.run.outdir;
  const auto points = run_sweep(cfg, grid, dir);
  write_config_copy(dir, cfg);
  for (const auto& p : points) {
    std::printf("%s rate %.4f eps %s: %.4f +/- %.4f\n", std::string(to_string(p.selector)).c_str(),
                p.rate, p.epsilon ? fixed6(*p.epsilon).c_str() : "off", p.report.mean_accuracy,
                p.report.std_accuracy);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning simulator with entropy-based client selection"};
  app.require_subcommand(1);

  ConfigFlags partition_flags, trace_flags, train_flags, sweep_flags;

  auto* partition = app.add_subcommand("partition", "Write partitions and per-client label counts");
  add_config_flags(*partition, partition_flags);

  auto* trace = app.add_subcommand("select-trace", "Per-round cohort entropy for both selectors");
  add_config_flags(*trace, trace_flags);
  std::optional<std::size_t> trace_rounds;
  trace->add_option("--rounds", trace_rounds, "Rounds to trace (default: train.rounds)");

  auto* train = app.add_subcommand("train", "Run one experiment over every configured seed");
  add_config_flags(*train, train_flags);

  auto* sweep = app.add_subcommand("sweep", "Grid over selectors, participation rates and epsilon");
  add_config_flags(*sweep, sweep_flags);
  std::vector<std::string> selectors{"fedentopt", "random"};
  std::vector<double> rates{0.04, 0.05, 0.06, 0.07, 0.08, 0.09};
  std::vector<std::string> epsilons{"off"};
  sweep->add_option("--selectors", selectors, "Selectors to compare")->delimiter(',');
  sweep->add_option("--rates", rates, "Participation rates")->delimiter(',');
  sweep->add_option("--epsilons", epsilons, "DP budgets; 'off' disables DP")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (partition->parsed()) {
      run_partition(resolve_config(*partition, partition_flags));
    } else if (trace->parsed()) {
      const auto cfg = resolve_config(*trace, trace_flags);
      run_select_trace(cfg, trace_rounds.value_or(cfg.train.rounds));
    } else if (train->parsed()) {
      run_train(resolve_config(*train, train_flags));
    } else if (sweep->parsed()) {
      run_sweep_command(resolve_config(*sweep, sweep_flags), selectors, rates, epsilons);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "fedsim: %s\n", e.what());
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "fedsim: %s\n", e.what());
    return 1;
  }
  return 0;
}
