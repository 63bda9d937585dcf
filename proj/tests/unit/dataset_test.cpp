#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedsim/dataset.hpp"
#include "fedsim/error.hpp"
#include "fedsim/model.hpp"
#include "fedsim/training.hpp"

namespace fedsim {
namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name, const std::string& bytes) {
  const fs::path p = fs::temp_directory_path() / ("fedsim_dataset_test_" + name);
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  return p;
}

std::string record(unsigned char label, unsigned char fill) {
  std::string r(kCifar10RecordBytes, static_cast<char>(fill));
  r[0] = static_cast<char>(label);
  return r;
}

TEST(Cifar10, ReadsRecords) {
  std::string bytes = record(3, 0) + record(7, 255);
  bytes[1 + 5] = static_cast<char>(51);
  const auto p = temp_file("two.bin", bytes);
  const auto data = load_cifar10_bin(p);
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data.num_features(), kCifar10PixelBytes);
  EXPECT_EQ(data.num_classes(), 10u);
  EXPECT_EQ(data.label(0), 3u);
  EXPECT_EQ(data.label(1), 7u);
  EXPECT_EQ(data.row(0)[0], 0.0);
  EXPECT_DOUBLE_EQ(data.row(0)[5], 0.2);
  EXPECT_EQ(data.row(1)[3071], 1.0);
  fs::remove(p);
}

TEST(Cifar10, EmptyFileIsEmptyDataset) {
  const auto p = temp_file("empty.bin", "");
  EXPECT_EQ(load_cifar10_bin(p).size(), 0u);
  fs::remove(p);
}

TEST(Cifar10, Errors) {
  const auto partial = temp_file("partial.bin", std::string(kCifar10PixelBytes, '\0'));
  EXPECT_THROW(load_cifar10_bin(partial), FormatError);
  const auto badlabel = temp_file("badlabel.bin", record(10, 0));
  EXPECT_THROW(load_cifar10_bin(badlabel), FormatError);
  EXPECT_THROW(load_cifar10_bin("/nonexistent/fedsim.bin"), IoError);
  EXPECT_THROW(load_cifar10_dir("/nonexistent/fedsim"), IoError);
  fs::remove(partial);
  fs::remove(badlabel);
}

TEST(Dataset, Validation) {
  EXPECT_THROW(Dataset(2, 2, {1.0, 2.0, 3.0}, {0}), DimensionError);
  EXPECT_THROW(Dataset(1, 2, {1.0}, {2}), DomainError);
  const Dataset d(1, 3, {1.0, 2.0, 3.0}, {0, 1, 2});
  const std::vector<std::size_t> rows{2, 0};
  const auto s = d.subset(rows);
  EXPECT_EQ(s.labels()[0], 2u);
  EXPECT_EQ(s.row(1)[0], 1.0);
}

TEST(Synthetic, ShapeAndDeterminism) {
  const SyntheticSpec spec{4, 6, 25, 4.0};
  const auto a = gen_synthetic(spec, 11);
  EXPECT_EQ(a.size(), 100u);
  EXPECT_EQ(a.num_features(), 6u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.label(i), i / 25);
  EXPECT_EQ(a, gen_synthetic(spec, 11));
  EXPECT_NE(a, gen_synthetic(spec, 12));
}

TEST(Synthetic, MeansArePairwiseSeparated) {
  for (const SyntheticSpec spec : {SyntheticSpec{10, 20, 1, 4.0}, SyntheticSpec{12, 5, 1, 4.0}}) {
    const auto means = synthetic_class_means(spec);
    for (std::size_t a = 0; a < spec.classes; ++a) {
      double r = 0.0;
      for (std::size_t k = 0; k < spec.dims; ++k) r += means[a * spec.dims + k] * means[a * spec.dims + k];
      EXPECT_NEAR(std::sqrt(r), spec.separation / std::sqrt(2.0), 1e-12);
      if (spec.classes <= spec.dims) {
        for (std::size_t b = a + 1; b < spec.classes; ++b) {
          double d2 = 0.0;
          for (std::size_t k = 0; k < spec.dims; ++k) {
            const double diff = means[a * spec.dims + k] - means[b * spec.dims + k];
            d2 += diff * diff;
          }
          EXPECT_NEAR(std::sqrt(d2), spec.separation, 1e-12);
        }
      }
    }
  }
}

TEST(Synthetic, WideSeparationIsNearlySeparableByNearestMean) {
  const SyntheticSpec spec{10, 20, 200, 10.0};
  const auto data = gen_synthetic(spec, 3);
  const auto means = synthetic_class_means(spec);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t c = 0; c < spec.classes; ++c) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < spec.dims; ++k) {
        const double diff = data.row(i)[k] - means[c * spec.dims + k];
        d2 += diff * diff;
      }
      if (d2 < best_d) {
        best_d = d2;
        best = c;
      }
    }
    correct += best == data.label(i);
  }
  EXPECT_GT(static_cast<double>(correct) / static_cast<double>(data.size()), 0.95);
}

TEST(Synthetic, ZeroSeparationMakesClassesIdentical) {
  const auto means = synthetic_class_means(SyntheticSpec{10, 20, 1, 0.0});
  for (double m : means) EXPECT_EQ(m, 0.0);
}

TEST(Synthetic, WideSeparationTrainsCentrallyAboveNinetyFivePercent) {
  const SyntheticSpec spec{10, 20, 200, 10.0};
  const auto train = gen_synthetic(spec, 21);
  const auto test = gen_synthetic(SyntheticSpec{10, 20, 50, 10.0}, 22);
  const ModelSpec model{ModelKind::kSoftmaxRegression, 20, 10, 0};
  TrainConfig cfg;
  cfg.local_epochs = 10;
  Rng init(23);
  auto params = init_params(model, init);
  Rng rng(24);
  params = local_train(model, params, train, cfg, cfg.lr, rng);
  EXPECT_GT(evaluate(model, params, test).accuracy, 0.95);
}

TEST(Dataset, CsvExport) {
  const Dataset d(2, 3, {0.5, -1.0, 2.0, 0.125}, {2, 0});
  std::ostringstream out;
  write_dataset_csv(out, d);
  EXPECT_EQ(out.str(), "label,f0,f1\n2,0.500000,-1.000000\n0,2.000000,0.125000\n");
}

}  // namespace
}  // namespace fedsim
