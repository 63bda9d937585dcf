#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/model.hpp"
#include "fedsim/partition.hpp"
#include "fedsim/training.hpp"

namespace fedsim {

enum class DatasetKind { kSynthetic, kCifar10 };
enum class PartitionKind { kQuantity, kDirichlet };
enum class SelectorKind { kFedEntOpt, kRandom };

std::string_view to_string(SelectorKind kind);

struct DatasetConfig {
  DatasetKind kind = DatasetKind::kSynthetic;
  std::string path;  // CIFAR-10 batch directory
  SyntheticSpec synthetic;
  friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

struct PartitionConfig {
  PartitionKind kind = PartitionKind::kQuantity;
  std::size_t labels_per_client = 2;
  double beta = 0.1;
  friend bool operator==(const PartitionConfig&, const PartitionConfig&) = default;
};

struct SelectConfig {
  SelectorKind strategy = SelectorKind::kFedEntOpt;
  std::size_t m = 0;        // explicit cohort size; 0 means use `rate`
  double rate = 0.1;        // participation rate when m == 0
  double q_fraction = 0.7;  // buffer capacity as a fraction of K
  friend bool operator==(const SelectConfig&, const SelectConfig&) = default;
};

struct DpConfig {
  bool enabled = false;
  double epsilon = 0.5;
  friend bool operator==(const DpConfig&, const DpConfig&) = default;
};

struct ModelConfig {
  ModelKind kind = ModelKind::kMlp;
  std::size_t hidden = 32;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct RunConfig {
  std::vector<std::uint64_t> seeds{1};
  std::string outdir = "out";
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Everything needed to reproduce an experiment. TrainConfig's cohort_size and
// seed are not config keys; the harness fills them from select.* and
// run.seeds.
struct ExperimentConfig {
  DatasetConfig dataset;
  PartitionConfig partition;
  std::size_t num_clients = 100;
  SelectConfig select;
  DpConfig dp;
  TrainConfig train;
  ModelConfig model;
  RunConfig run;

  // max(1, round-half-up(rate * K)) unless select.m is set.
  std::size_t cohort_size() const;
  // floor(q_fraction * K).
  std::size_t buffer_capacity() const;
  // Throws ConfigError on an inconsistent configuration, including a
  // buffer capacity above K - M.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Every recognised key, in emission order.
const std::vector<std::string>& config_keys();

// Sets one dotted key from its text value. Throws ConfigError on an unknown
// key or unparsable value.
void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const ExperimentConfig& cfg, std::string_view key);

// "key = value" lines; '#' starts a comment, blank lines are ignored.
// Unspecified keys keep their defaults.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);
std::string emit_config(const ExperimentConfig& cfg);

}  // namespace fedsim
