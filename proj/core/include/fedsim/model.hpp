#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

enum class ModelKind { kSoftmaxRegression, kMlp };

struct ModelSpec {
  ModelKind kind = ModelKind::kSoftmaxRegression;
  std::size_t input_dim = 0;
  std::size_t num_classes = 0;
  std::size_t hidden = 0;  // MLP only

  // Throws DomainError on zero dimensions or an MLP without hidden units.
  void validate() const;
  std::size_t parameter_count() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// A named weight or bias block inside the flat parameter vector. Weights are
// row-major (rows = fan-out, cols = fan-in); biases have cols == 1.
struct ParamSegment {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  friend bool operator==(const ParamSegment&, const ParamSegment&) = default;
};

// Softmax: W [C x d], b [C]. MLP: W1 [h x d], b1 [h], W2 [C x h], b2 [C].
std::vector<ParamSegment> param_layout(const ModelSpec& spec);

struct ModelParams {
  std::vector<double> values;
  std::vector<ParamSegment> layout;

  std::span<const double> segment(std::size_t i) const {
    return std::span<const double>(values).subspan(layout[i].offset, layout[i].size());
  }
  bool all_finite() const;
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

ModelParams zero_params(const ModelSpec& spec);

// Weights uniform in (-a, a) with a = sqrt(6 / (fan_in + fan_out)), biases 0.
ModelParams init_params(const ModelSpec& spec, Rng& rng);

struct LossGrad {
  double loss = 0.0;  // mean natural-log cross-entropy over the batch
  std::vector<double> grad;
};

// Mean cross-entropy over `rows` of `data` and its gradient. Weight decay is
// not part of the loss. Throws DomainError on an empty batch, DimensionError
// on mismatched shapes, NumericalError on a non-finite loss or gradient.
LossGrad forward_loss_grad(const ModelSpec& spec, const ModelParams& params, const Dataset& data,
                           std::span<const std::size_t> rows);
LossGrad forward_loss_grad(const ModelSpec& spec, const ModelParams& params, const Dataset& data);

// Class scores for one input.
std::vector<double> logits(const ModelSpec& spec, const ModelParams& params,
                           std::span<const double> x);

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  std::vector<double> per_class_recall;  // NaN for classes absent from the set
};

// Argmax accuracy (ties to the lowest class id) and mean cross-entropy.
// Throws DomainError on an empty test set.
EvalResult evaluate(const ModelSpec& spec, const ModelParams& params, const Dataset& test);

}  // namespace fedsim
