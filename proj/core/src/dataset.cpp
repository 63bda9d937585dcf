#include "fedsim/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>
#include <string>

#include "fedsim/error.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/text.hpp"

namespace fedsim {

Dataset::Dataset(std::size_t num_features, std::size_t num_classes, std::vector<double> features,
                 std::vector<Label> labels)
    : num_features_(num_features),
      num_classes_(num_classes),
      features_(std::move(features)),
      labels_(std::move(labels)) {
  if (features_.size() != labels_.size() * num_features_) {
    throw DimensionError("Dataset: " + std::to_string(features_.size()) + " feature values for " +
                         std::to_string(labels_.size()) + " rows of width " +
                         std::to_string(num_features_));
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= num_classes_) {
      throw DomainError("Dataset: label " + std::to_string(labels_[i]) + " at row " +
                        std::to_string(i) + " is not below " + std::to_string(num_classes_));
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.num_features_ = num_features_;
  out.num_classes_ = num_classes_;
  out.features_.reserve(rows.size() * num_features_);
  out.labels_.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= size()) throw DomainError("Dataset::subset: row " + std::to_string(r) + " out of range");
    const auto x = row(r);
    out.features_.insert(out.features_.end(), x.begin(), x.end());
    out.labels_.push_back(labels_[r]);
  }
  return out;
}

void Dataset::append(const Dataset& other) {
  if (empty() && num_features_ == 0) {
    *this = other;
    return;
  }
  if (other.num_features_ != num_features_ || other.num_classes_ != num_classes_) {
    throw DimensionError("Dataset::append: shape mismatch");
  }
  features_.insert(features_.end(), other.features_.begin(), other.features_.end());
  labels_.insert(labels_.end(), other.labels_.begin(), other.labels_.end());
}

std::vector<double> synthetic_class_means(const SyntheticSpec& spec) {
  const double radius = spec.separation / std::sqrt(2.0);
  std::vector<double> means(spec.classes * spec.dims, 0.0);
  if (spec.classes <= spec.dims) {
    for (std::size_t c = 0; c < spec.classes; ++c) means[c * spec.dims + c] = radius;
    return means;
  }
  Rng rng(0x5eedc1a55e5ULL);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    double norm = 0.0;
    for (std::size_t f = 0; f < spec.dims; ++f) {
      const double v = rng.normal();
      means[c * spec.dims + f] = v;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (std::size_t f = 0; f < spec.dims; ++f) means[c * spec.dims + f] *= radius / norm;
  }
  return means;
}

Dataset gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.classes == 0 || spec.dims == 0 || spec.per_class == 0) {
    throw DomainError("gen_synthetic: classes, dims and per_class must be positive");
  }
  if (!(spec.separation >= 0.0)) throw DomainError("gen_synthetic: separation must be >= 0");
  const auto means = synthetic_class_means(spec);
  Rng rng(seed);
  const std::size_t n = spec.classes * spec.per_class;
  std::vector<double> features;
  features.reserve(n * spec.dims);
  std::vector<Label> labels;
  labels.reserve(n);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      for (std::size_t f = 0; f < spec.dims; ++f) {
        features.push_back(means[c * spec.dims + f] + rng.normal());
      }
      labels.push_back(static_cast<Label>(c));
    }
  }
  return Dataset(spec.dims, spec.classes, std::move(features), std::move(labels));
}

Dataset load_cifar10_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open CIFAR-10 batch " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() % kCifar10RecordBytes != 0) {
    throw FormatError(path.string() + ": size " + std::to_string(bytes.size()) +
                      " is not a multiple of " + std::to_string(kCifar10RecordBytes));
  }
  const std::size_t n = bytes.size() / kCifar10RecordBytes;
  std::vector<double> features(n * kCifar10PixelBytes);
  std::vector<Label> labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    const unsigned char* rec = bytes.data() + r * kCifar10RecordBytes;
    if (rec[0] >= kCifar10Classes) {
      throw FormatError(path.string() + ": record " + std::to_string(r) + " has label " +
                        std::to_string(rec[0]));
    }
    labels[r] = rec[0];
    for (std::size_t p = 0; p < kCifar10PixelBytes; ++p) {
      features[r * kCifar10PixelBytes + p] = static_cast<double>(rec[1 + p]) / 255.0;
    }
  }
  return Dataset(kCifar10PixelBytes, kCifar10Classes, std::move(features), std::move(labels));
}

TrainTestSplit load_cifar10_dir(const std::filesystem::path& dir) {
  TrainTestSplit split;
  for (int b = 1; b <= 5; ++b) {
    split.train.append(load_cifar10_bin(dir / ("data_batch_" + std::to_string(b) + ".bin")));
  }
  split.test = load_cifar10_bin(dir / "test_batch.bin");
  return split;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "label";
  for (std::size_t f = 0; f < data.num_features(); ++f) out << ",f" << f;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.label(i);
    for (double v : data.row(i)) out << ',' << fixed6(v);
    out << '\n';
  }
}

}  // namespace fedsim
