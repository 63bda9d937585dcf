#include "fedsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "fedsim/error.hpp"
#include "fedsim/text.hpp"

namespace fedsim {
namespace {

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_unsigned(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" +
                      std::string(text) + "'");
  }
  return value;
}

double parse_real(std::string_view key, std::string_view text) {
  const std::string s(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + s + "'");
  }
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(text) + "'");
}

template <typename E>
E parse_enum(std::string_view key, std::string_view text,
             std::initializer_list<std::pair<std::string_view, E>> names) {
  for (const auto& [name, value] : names) {
    if (name == text) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : "|") + std::string(name);
  throw ConfigError(std::string(key) + ": expected " + allowed + ", got '" + std::string(text) + "'");
}

struct KeyHandler {
  std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define FEDSIM_SIZE_KEY(expr)                                                            \
  KeyHandler{[](ExperimentConfig& c, std::string_view k, std::string_view v) {          \
               expr = parse_unsigned<std::size_t>(k, v);                                 \
             },                                                                          \
             [](const ExperimentConfig& c) { return std::to_string(expr); }}
#define FEDSIM_REAL_KEY(expr)                                                            \
  KeyHandler{[](ExperimentConfig& c, std::string_view k, std::string_view v) {          \
               expr = parse_real(k, v);                                                  \
             },                                                                          \
             [](const ExperimentConfig& c) { return format_real(expr); }}

const std::vector<std::pair<std::string, KeyHandler>>& handlers() {
  static const std::vector<std::pair<std::string, KeyHandler>> table = {
      {"dataset.kind",
       {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
          c.dataset.kind = parse_enum<DatasetKind>(
              k, v, {{"synthetic", DatasetKind::kSynthetic}, {"cifar10", DatasetKind::kCifar10}});
        },
        [](const ExperimentConfig& c) {
          return std::string(c.dataset.kind == DatasetKind::kSynthetic ? "synthetic" : "cifar10");
        }}},
      {"dataset.path",
       {[](ExperimentConfig& c, std::string_view, std::string_view v) { c.dataset.path = v; },
        [](const ExperimentConfig& c) { return c.dataset.path; }}},
      {"dataset.synthetic.classes", FEDSIM_SIZE_KEY(c.dataset.synthetic.classes)},
      {"dataset.synthetic.dims", FEDSIM_SIZE_KEY(c.dataset.synthetic.dims)},
      {"dataset.synthetic.per_class", FEDSIM_SIZE_KEY(c.dataset.synthetic.per_class)},
      {"dataset.synthetic.separation", FEDSIM_REAL_KEY(c.dataset.synthetic.separation)},
      {"partition.kind",
       {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
          c.partition.kind = parse_enum<PartitionKind>(
              k, v, {{"quantity", PartitionKind::kQuantity}, {"dirichlet", PartitionKind::kDirichlet}});
        },
        [](const ExperimentConfig& c) {
          return std::string(c.partition.kind == PartitionKind::kQuantity ? "quantity" : "dirichlet");
        }}},
      {"partition.j", FEDSIM_SIZE_KEY(c.partition.labels_per_client)},
      {"partition.beta", FEDSIM_REAL_KEY(c.partition.beta)},
      {"clients.k", FEDSIM_SIZE_KEY(c.num_clients)},
      {"select.strategy",
       {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
          c.select.strategy = parse_enum<SelectorKind>(
              k, v, {{"fedentopt", SelectorKind::kFedEntOpt}, {"random", SelectorKind::kRandom}});
        },
        [](const ExperimentConfig& c) { return std::string(to_string(c.select.strategy)); }}},
      {"select.m", FEDSIM_SIZE_KEY(c.select.m)},
      {"select.rate", FEDSIM_REAL_KEY(c.select.rate)},
      {"select.q_fraction", FEDSIM_REAL_KEY(c.select.q_fraction)},
      {"dp.enabled",
       {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
          c.dp.enabled = parse_bool(k, v);
        },
        [](const ExperimentConfig& c) { return std::string(c.dp.enabled ? "true" : "false"); }}},
      {"dp.epsilon", FEDSIM_REAL_KEY(c.dp.epsilon)},
      {"train.epochs", FEDSIM_SIZE_KEY(c.train.local_epochs)},
      {"train.batch", FEDSIM_SIZE_KEY(c.train.batch_size)},
      {"train.lr", FEDSIM_REAL_KEY(c.train.lr)},
      {"train.momentum", FEDSIM_REAL_KEY(c.train.momentum)},
      {"train.weight_decay", FEDSIM_REAL_KEY(c.train.weight_decay)},
      {"train.lr_decay", FEDSIM_REAL_KEY(c.train.lr_decay_per_round)},
      {"train.rounds", FEDSIM_SIZE_KEY(c.train.rounds)},
      {"model.kind",
       {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
          c.model.kind = parse_enum<ModelKind>(
              k, v, {{"softmax", ModelKind::kSoftmaxRegression}, {"mlp", ModelKind::kMlp}});
        },
        [](const ExperimentConfig& c) {
          return std::string(c.model.kind == ModelKind::kMlp ? "mlp" : "softmax");
        }}},
      {"model.hidden", FEDSIM_SIZE_KEY(c.model.hidden)},
      {"run.seeds",
       {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
          std::vector<std::uint64_t> seeds;
          for (const auto& part : split(v, ',')) {
            seeds.push_back(parse_unsigned<std::uint64_t>(k, trim(part)));
          }
          c.run.seeds = std::move(seeds);
        },
        [](const ExperimentConfig& c) {
          std::string out;
          for (std::size_t i = 0; i < c.run.seeds.size(); ++i) {
            if (i > 0) out += ',';
            out += std::to_string(c.run.seeds[i]);
          }
          return out;
        }}},
      {"run.outdir",
       {[](ExperimentConfig& c, std::string_view, std::string_view v) { c.run.outdir = v; },
        [](const ExperimentConfig& c) { return c.run.outdir; }}},
  };
  return table;
}

#undef FEDSIM_SIZE_KEY
#undef FEDSIM_REAL_KEY

const KeyHandler& handler_for(std::string_view key) {
  for (const auto& [name, h] : handlers()) {
    if (name == key) return h;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

std::string_view to_string(SelectorKind kind) {
  return kind == SelectorKind::kFedEntOpt ? "fedentopt" : "random";
}

std::size_t ExperimentConfig::cohort_size() const {
  if (select.m > 0) return select.m;
  const double exact = select.rate * static_cast<double>(num_clients);
  const auto rounded = static_cast<std::size_t>(std::floor(exact + 0.5));
  return std::max<std::size_t>(1, rounded);
}

std::size_t ExperimentConfig::buffer_capacity() const {
  return static_cast<std::size_t>(std::floor(select.q_fraction * static_cast<double>(num_clients)));
}

void ExperimentConfig::validate() const {
  if (num_clients == 0) throw ConfigError("clients.k must be positive");
  if (select.m == 0 && !(select.rate > 0.0 && select.rate <= 1.0)) {
    throw ConfigError("select.rate must be in (0, 1]");
  }
  if (cohort_size() > num_clients) {
    throw ConfigError("cohort size " + std::to_string(cohort_size()) + " exceeds clients.k");
  }
  if (!(select.q_fraction >= 0.0 && select.q_fraction < 1.0)) {
    throw ConfigError("select.q_fraction must be in [0, 1)");
  }
  if (select.strategy == SelectorKind::kFedEntOpt &&
      buffer_capacity() > num_clients - cohort_size()) {
    throw ConfigError("buffer capacity " + std::to_string(buffer_capacity()) +
                      " exceeds K - M = " + std::to_string(num_clients - cohort_size()));
  }
  if (dp.enabled && !(dp.epsilon > 0.0)) throw ConfigError("dp.epsilon must be positive");
  if (partition.kind == PartitionKind::kDirichlet && !(partition.beta > 0.0)) {
    throw ConfigError("partition.beta must be positive");
  }
  if (partition.kind == PartitionKind::kQuantity && partition.labels_per_client == 0) {
    throw ConfigError("partition.j must be positive");
  }
  if (dataset.kind == DatasetKind::kCifar10 && dataset.path.empty()) {
    throw ConfigError("dataset.path is required for cifar10");
  }
  if (model.kind == ModelKind::kMlp && model.hidden == 0) {
    throw ConfigError("model.hidden must be positive");
  }
  if (run.seeds.empty()) throw ConfigError("run.seeds must list at least one seed");
  TrainConfig t = train;
  t.cohort_size = cohort_size();
  t.validate();
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, h] : handlers()) k.push_back(name);
    return k;
  }();
  return keys;
}

void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  handler_for(key).set(cfg, key, trim(value));
}

std::string get_config_value(const ExperimentConfig& cfg, std::string_view key) {
  return handler_for(key).get(cfg);
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_config_value(cfg, trim(view.substr(0, eq)), view.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  return parse_config(in);
}

std::string emit_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  for (const auto& [name, h] : handlers()) out << name << " = " << h.get(cfg) << '\n';
  return out.str();
}

}  // namespace fedsim
