#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace fedsim {

// Purpose tags for stream derivation. Every random stream in a run is keyed
// by (global seed, purpose, round, index); the numeric values are part of
// the reproducibility contract and must not be renumbered.
enum class StreamPurpose : std::uint64_t {
  kTrainData = 1,
  kTestData = 2,
  kPartition = 3,   // index = class id
  kPrivacy = 4,     // index = client id
  kSelection = 5,   // round = communication round
  kModelInit = 6,
  kLocalTrain = 7,  // round, index = client id
  kShuffle = 8,     // partition-internal shuffles
};

// Mixes the stream key into a single 64-bit seed with chained SplitMix64
// finalizers. Distinct keys give unrelated seeds.
std::uint64_t derive_seed(std::uint64_t seed, StreamPurpose purpose, std::uint64_t round = 0,
                          std::uint64_t index = 0);

// Seeded generator over std::mt19937_64. The distribution transforms are
// implemented here rather than with <random> distributions so that draws are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t round = 0,
                    std::uint64_t index = 0) {
    return Rng(derive_seed(seed, purpose, round, index));
  }

  std::uint64_t next_u64() {
    ++draws_;
    return engine_();
  }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0, 1).
  double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  // Uniform integer on [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  double normal();

  // Natural log of a Gamma(shape, 1) draw. Working in log space keeps tiny
  // shapes (Dirichlet concentration 0.1 and below) from underflowing to 0.
  double log_gamma_variate(double shape);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      using std::swap;
      swap(values[i - 1], values[j]);
    }
  }

  // Number of raw 64-bit words consumed so far.
  std::uint64_t draws() const { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace fedsim
