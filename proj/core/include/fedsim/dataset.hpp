#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "fedsim/partition.hpp"

namespace fedsim {

// Labeled samples: a row-major N x d feature matrix plus N class ids.
class Dataset {
 public:
  Dataset() = default;
  // Throws DimensionError if features.size() != labels.size() * num_features,
  // DomainError if a label is not below num_classes.
  Dataset(std::size_t num_features, std::size_t num_classes, std::vector<double> features,
          std::vector<Label> labels);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  std::size_t num_features() const { return num_features_; }
  std::size_t num_classes() const { return num_classes_; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features_).subspan(i * num_features_, num_features_);
  }
  Label label(std::size_t i) const { return labels_[i]; }
  std::span<const Label> labels() const { return labels_; }
  std::span<const double> features() const { return features_; }

  // Rows in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;
  // Appends `other`; shapes must agree.
  void append(const Dataset& other);

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t num_features_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<double> features_;
  std::vector<Label> labels_;
};

struct SyntheticSpec {
  std::size_t classes = 10;
  std::size_t dims = 20;
  std::size_t per_class = 200;
  double separation = 4.0;  // pairwise distance between class means, in units of blob std
  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

// Isotropic unit-variance Gaussian blobs, one per class, stored class-major.
// When classes <= dims the means are (separation / sqrt 2) * e_c, so every
// pair of means is exactly `separation` apart; otherwise they are random
// directions at the same radius, drawn from a fixed stream. Means depend
// only on the spec, so two seeds give train/test sets of the same task.
Dataset gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// Class means used by gen_synthetic, row-major classes x dims.
std::vector<double> synthetic_class_means(const SyntheticSpec& spec);

inline constexpr std::size_t kCifar10RecordBytes = 3073;
inline constexpr std::size_t kCifar10PixelBytes = 3072;
inline constexpr std::size_t kCifar10Classes = 10;

// One CIFAR-10 binary batch: records of one label byte followed by 3072
// channel-planar pixel bytes, scaled to [0, 1]. Throws IoError if the file
// cannot be read, FormatError on a partial record or a label above 9.
Dataset load_cifar10_bin(const std::filesystem::path& path);

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

// data_batch_1.bin..data_batch_5.bin as train and test_batch.bin as test.
TrainTestSplit load_cifar10_dir(const std::filesystem::path& dir);

// Debug export: "label,f0,f1,..." with six decimal places.
void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace fedsim
