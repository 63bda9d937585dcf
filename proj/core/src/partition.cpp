#include "fedsim/partition.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "fedsim/error.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {
namespace {

// Sample indices grouped by class, in ascending index order.
std::vector<std::vector<std::size_t>> indices_by_class(std::span<const Label> labels,
                                                       std::size_t num_classes) {
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      throw DomainError("partition: label " + std::to_string(labels[i]) + " at index " +
                        std::to_string(i) + " is not below " + std::to_string(num_classes));
    }
    by_class[labels[i]].push_back(i);
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (by_class[c].empty()) throw EmptyClassError("partition: class " + std::to_string(c) +
                                                   " has no samples");
  }
  return by_class;
}

}  // namespace

Partition partition_quantity(std::span<const Label> labels, std::size_t num_classes,
                             std::size_t num_clients, std::size_t labels_per_client,
                             std::uint64_t seed) {
  if (num_clients == 0) throw DomainError("partition_quantity: need at least one client");
  if (labels_per_client == 0 || labels_per_client > num_classes) {
    throw DomainError("partition_quantity: labels per client must be in [1, C]");
  }
  if (labels_per_client * num_clients < num_classes) {
    throw InfeasibleError("partition_quantity: j*K = " +
                          std::to_string(labels_per_client * num_clients) +
                          " cannot cover " + std::to_string(num_classes) + " classes");
  }
  auto by_class = indices_by_class(labels, num_classes);

  std::vector<std::size_t> client_order(num_clients);
  std::iota(client_order.begin(), client_order.end(), std::size_t{0});
  Rng order_rng = Rng::stream(seed, StreamPurpose::kShuffle);
  order_rng.shuffle(std::span(client_order));

  // holders[c] lists clients owning class c; filled in ascending client id.
  std::vector<std::vector<std::size_t>> holders(num_classes);
  std::vector<std::vector<std::size_t>> classes_of(num_clients);
  for (std::size_t pos = 0; pos < num_clients; ++pos) {
    for (std::size_t t = 0; t < labels_per_client; ++t) {
      classes_of[client_order[pos]].push_back((pos * labels_per_client + t) % num_classes);
    }
  }
  for (std::size_t k = 0; k < num_clients; ++k) {
    for (std::size_t c : classes_of[k]) holders[c].push_back(k);
  }

  Partition out;
  out.assignment.resize(num_clients);
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& samples = by_class[c];
    const auto& owners = holders[c];
    if (samples.size() < owners.size()) {
      throw InfeasibleError("partition_quantity: class " + std::to_string(c) + " has " +
                            std::to_string(samples.size()) + " samples for " +
                            std::to_string(owners.size()) + " holders");
    }
    Rng class_rng = Rng::stream(seed, StreamPurpose::kPartition, 0, c);
    class_rng.shuffle(std::span(samples));
    const std::size_t base = samples.size() / owners.size();
    const std::size_t extra = samples.size() % owners.size();
    std::size_t next = 0;
    for (std::size_t h = 0; h < owners.size(); ++h) {
      const std::size_t take = base + (h < extra ? 1 : 0);
      auto& dest = out.assignment[owners[h]];
      dest.insert(dest.end(), samples.begin() + static_cast<std::ptrdiff_t>(next),
                  samples.begin() + static_cast<std::ptrdiff_t>(next + take));
      next += take;
    }
  }
  return out;
}

std::vector<std::size_t> largest_remainder_counts(std::span<const double> proportions,
                                                  std::size_t total) {
  const std::size_t n = proportions.size();
  if (n == 0) throw DomainError("largest_remainder_counts: no proportions");
  std::vector<std::size_t> counts(n);
  std::vector<double> remainder(n);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double exact = proportions[k] * static_cast<double>(total);
    const double whole = std::floor(exact);
    counts[k] = static_cast<std::size_t>(whole);
    remainder[k] = exact - whole;
    assigned += counts[k];
  }
  // Floating error can push the floor sum one past the total; trim from the
  // smallest remainders in that case.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  std::size_t i = 0;
  while (assigned < total) {
    ++counts[order[i % n]];
    ++assigned;
    ++i;
  }
  std::size_t cursor = n;
  while (assigned > total) {
    cursor = (cursor == 0 ? n : cursor) - 1;
    auto& c = counts[order[cursor]];
    if (c > 0) {
      --c;
      --assigned;
    }
  }
  return counts;
}

Partition partition_dirichlet(std::span<const Label> labels, std::size_t num_classes,
                              std::size_t num_clients, double beta, std::uint64_t seed) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DomainError("partition_dirichlet: beta must be positive and finite");
  }
  if (num_clients == 0) throw DomainError("partition_dirichlet: need at least one client");
  auto by_class = indices_by_class(labels, num_classes);
  if (labels.size() < num_clients) {
    throw InfeasibleError("partition_dirichlet: " + std::to_string(labels.size()) +
                          " samples cannot fill " + std::to_string(num_clients) + " clients");
  }

  Partition out;
  out.assignment.resize(num_clients);
  std::vector<double> log_draws(num_clients);
  std::vector<double> proportions(num_clients);
  for (std::size_t c = 0; c < num_classes; ++c) {
    Rng class_rng = Rng::stream(seed, StreamPurpose::kPartition, 0, c);
    for (auto& g : log_draws) g = class_rng.log_gamma_variate(beta);
    const double peak = *std::max_element(log_draws.begin(), log_draws.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < num_clients; ++k) {
      proportions[k] = std::exp(log_draws[k] - peak);
      sum += proportions[k];
    }
    for (auto& p : proportions) p /= sum;

    auto& samples = by_class[c];
    class_rng.shuffle(std::span(samples));
    const auto counts = largest_remainder_counts(proportions, samples.size());
    std::size_t next = 0;
    for (std::size_t k = 0; k < num_clients; ++k) {
      auto& dest = out.assignment[k];
      dest.insert(dest.end(), samples.begin() + static_cast<std::ptrdiff_t>(next),
                  samples.begin() + static_cast<std::ptrdiff_t>(next + counts[k]));
      next += counts[k];
    }
  }

  for (;;) {
    auto empty = std::find_if(out.assignment.begin(), out.assignment.end(),
                              [](const auto& a) { return a.empty(); });
    if (empty == out.assignment.end()) break;
    // max_element returns the first maximum, i.e. the lowest id on ties.
    auto largest = std::max_element(
        out.assignment.begin(), out.assignment.end(),
        [](const auto& a, const auto& b) { return a.size() < b.size(); });
    empty->push_back(largest->back());
    largest->pop_back();
  }
  return out;
}

Partition make_partition(std::span<const Label> labels, std::size_t num_classes,
                         const PartitionSpec& spec) {
  if (const auto* q = std::get_if<QuantitySkew>(&spec.kind)) {
    return partition_quantity(labels, num_classes, spec.num_clients, q->labels_per_client,
                              spec.seed);
  }
  const auto& d = std::get<DirichletSkew>(spec.kind);
  return partition_dirichlet(labels, num_classes, spec.num_clients, d.beta, spec.seed);
}

std::vector<LabelCounts> counts_from_partition(const Partition& partition,
                                               std::span<const Label> labels,
                                               std::size_t num_classes) {
  std::vector<LabelCounts> out;
  out.reserve(partition.num_clients());
  for (std::size_t k = 0; k < partition.num_clients(); ++k) {
    std::vector<double> hist(num_classes, 0.0);
    for (std::size_t idx : partition.assignment[k]) {
      if (idx >= labels.size()) throw DomainError("counts_from_partition: index out of range");
      hist.at(labels[idx]) += 1.0;
    }
    out.emplace_back(std::move(hist), client_id(k));
  }
  return out;
}

void write_partition(std::ostream& out, const Partition& partition) {
  for (std::size_t k = 0; k < partition.num_clients(); ++k) {
    out << k << '\t';
    const auto& idx = partition.assignment[k];
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (i > 0) out << ',';
      out << idx[i];
    }
    out << '\n';
  }
}

Partition read_partition(std::istream& in) {
  Partition partition;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError("partition line " + std::to_string(line_no) + ": missing tab");
    }
    std::size_t client = 0;
    try {
      std::size_t used = 0;
      client = std::stoul(line.substr(0, tab), &used);
      if (used != tab) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw FormatError("partition line " + std::to_string(line_no) + ": bad client id");
    }
    if (client != partition.assignment.size()) {
      throw FormatError("partition line " + std::to_string(line_no) + ": expected client " +
                        std::to_string(partition.assignment.size()));
    }
    std::vector<std::size_t> indices;
    std::stringstream fields(line.substr(tab + 1));
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        std::size_t used = 0;
        indices.push_back(std::stoull(field, &used));
        if (used != field.size()) throw std::invalid_argument("trailing");
      } catch (const std::logic_error&) {
        throw FormatError("partition line " + std::to_string(line_no) + ": bad index '" +
                          field + "'");
      }
    }
    partition.assignment.push_back(std::move(indices));
  }
  return partition;
}

}  // namespace fedsim
