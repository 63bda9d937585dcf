#include "fedsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fedsim/error.hpp"

namespace fedsim {
namespace {

void check_shapes(const ModelSpec& spec, const ModelParams& params, const Dataset& data) {
  if (params.values.size() != spec.parameter_count()) {
    throw DimensionError("model: " + std::to_string(params.values.size()) +
                         " parameters, spec needs " + std::to_string(spec.parameter_count()));
  }
  if (data.num_features() != spec.input_dim) {
    throw DimensionError("model: data has " + std::to_string(data.num_features()) +
                         " features, spec expects " + std::to_string(spec.input_dim));
  }
  if (data.num_classes() > spec.num_classes) {
    throw DimensionError("model: data has more classes than the model outputs");
  }
}

// out[r] = b[r] + sum_c w[r, c] * x[c]
void affine(std::span<const double> w, std::span<const double> b, std::span<const double> x,
            std::span<double> out) {
  const std::size_t cols = x.size();
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double* wr = w.data() + r * cols;
    double acc = b[r];
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    out[r] = acc;
  }
}

// In-place softmax; returns log-sum-exp of the input.
double softmax_inplace(std::span<double> z) {
  const double peak = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (auto& v : z) v /= sum;
  return peak + std::log(sum);
}

// Per-sample scratch buffers for the forward/backward pass.
struct Workspace {
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  std::vector<double> scores;
  std::vector<double> d_hidden;

  explicit Workspace(const ModelSpec& spec)
      : hidden_pre(spec.hidden), hidden(spec.hidden), scores(spec.num_classes),
        d_hidden(spec.hidden) {}
};

// Fills ws.scores with logits; for the MLP also the hidden activations.
void forward(const ModelSpec& spec, const ModelParams& p, std::span<const double> x,
             Workspace& ws) {
  if (spec.kind == ModelKind::kSoftmaxRegression) {
    affine(p.segment(0), p.segment(1), x, ws.scores);
    return;
  }
  affine(p.segment(0), p.segment(1), x, ws.hidden_pre);
  for (std::size_t i = 0; i < spec.hidden; ++i) ws.hidden[i] = std::max(0.0, ws.hidden_pre[i]);
  affine(p.segment(2), p.segment(3), ws.hidden, ws.scores);
}

}  // namespace

void ModelSpec::validate() const {
  if (input_dim == 0 || num_classes == 0) throw DomainError("ModelSpec: zero dimension");
  if (kind == ModelKind::kMlp && hidden == 0) throw DomainError("ModelSpec: MLP needs hidden > 0");
}

std::size_t ModelSpec::parameter_count() const {
  if (kind == ModelKind::kSoftmaxRegression) return num_classes * (input_dim + 1);
  return hidden * (input_dim + 1) + num_classes * (hidden + 1);
}

std::vector<ParamSegment> param_layout(const ModelSpec& spec) {
  spec.validate();
  std::vector<ParamSegment> layout;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    layout.push_back({std::move(name), offset, rows, cols});
    offset += rows * cols;
  };
  if (spec.kind == ModelKind::kSoftmaxRegression) {
    add("weight", spec.num_classes, spec.input_dim);
    add("bias", spec.num_classes, 1);
  } else {
    add("hidden.weight", spec.hidden, spec.input_dim);
    add("hidden.bias", spec.hidden, 1);
    add("output.weight", spec.num_classes, spec.hidden);
    add("output.bias", spec.num_classes, 1);
  }
  return layout;
}

bool ModelParams::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

ModelParams zero_params(const ModelSpec& spec) {
  ModelParams p;
  p.layout = param_layout(spec);
  p.values.assign(spec.parameter_count(), 0.0);
  return p;
}

ModelParams init_params(const ModelSpec& spec, Rng& rng) {
  ModelParams p = zero_params(spec);
  for (const auto& seg : p.layout) {
    if (seg.cols == 1) continue;  // bias
    const double a = std::sqrt(6.0 / static_cast<double>(seg.rows + seg.cols));
    for (std::size_t i = 0; i < seg.size(); ++i) {
      p.values[seg.offset + i] = a * (2.0 * rng.uniform() - 1.0);
    }
  }
  return p;
}

LossGrad forward_loss_grad(const ModelSpec& spec, const ModelParams& params, const Dataset& data,
                           std::span<const std::size_t> rows) {
  if (rows.empty()) throw DomainError("forward_loss_grad: empty batch");
  check_shapes(spec, params, data);

  LossGrad out;
  out.grad.assign(params.values.size(), 0.0);
  Workspace ws(spec);
  const auto& layout = params.layout;
  const std::size_t d = spec.input_dim;
  const std::size_t c_out = spec.num_classes;

  for (std::size_t r : rows) {
    const auto x = data.row(r);
    const Label y = data.label(r);
    forward(spec, params, x, ws);
    const double z_y = ws.scores[y];
    out.loss += softmax_inplace(ws.scores) - z_y;
    ws.scores[y] -= 1.0;  // d loss / d logits

    // Output layer: input is x for softmax regression, the hidden layer otherwise.
    const bool mlp = spec.kind == ModelKind::kMlp;
    const std::span<const double> in = mlp ? std::span<const double>(ws.hidden) : x;
    const std::size_t w_off = layout[mlp ? 2 : 0].offset;
    const std::size_t b_off = layout[mlp ? 3 : 1].offset;
    for (std::size_t k = 0; k < c_out; ++k) {
      const double g = ws.scores[k];
      double* gw = out.grad.data() + w_off + k * in.size();
      for (std::size_t j = 0; j < in.size(); ++j) gw[j] += g * in[j];
      out.grad[b_off + k] += g;
    }
    if (!mlp) continue;

    const auto w2 = params.segment(2);
    for (std::size_t j = 0; j < spec.hidden; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < c_out; ++k) acc += w2[k * spec.hidden + j] * ws.scores[k];
      ws.d_hidden[j] = ws.hidden_pre[j] > 0.0 ? acc : 0.0;
    }
    const std::size_t w1_off = layout[0].offset;
    const std::size_t b1_off = layout[1].offset;
    for (std::size_t j = 0; j < spec.hidden; ++j) {
      const double g = ws.d_hidden[j];
      if (g == 0.0) continue;
      double* gw = out.grad.data() + w1_off + j * d;
      for (std::size_t i = 0; i < d; ++i) gw[i] += g * x[i];
      out.grad[b1_off + j] += g;
    }
  }

  const double inv_n = 1.0 / static_cast<double>(rows.size());
  out.loss *= inv_n;
  for (auto& g : out.grad) g *= inv_n;

  if (!std::isfinite(out.loss)) throw NumericalError("forward_loss_grad: non-finite loss");
  for (std::size_t i = 0; i < out.grad.size(); ++i) {
    if (!std::isfinite(out.grad[i])) {
      throw NumericalError("forward_loss_grad: non-finite gradient at parameter " +
                           std::to_string(i));
    }
  }
  return out;
}

LossGrad forward_loss_grad(const ModelSpec& spec, const ModelParams& params, const Dataset& data) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return forward_loss_grad(spec, params, data, rows);
}

std::vector<double> logits(const ModelSpec& spec, const ModelParams& params,
                           std::span<const double> x) {
  if (x.size() != spec.input_dim) throw DimensionError("logits: input width mismatch");
  Workspace ws(spec);
  forward(spec, params, x, ws);
  return ws.scores;
}

EvalResult evaluate(const ModelSpec& spec, const ModelParams& params, const Dataset& test) {
  if (test.empty()) throw DomainError("evaluate: empty test set");
  check_shapes(spec, params, test);
  Workspace ws(spec);
  std::vector<std::size_t> hits(spec.num_classes, 0);
  std::vector<std::size_t> support(spec.num_classes, 0);
  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t r = 0; r < test.size(); ++r) {
    forward(spec, params, test.row(r), ws);
    const Label y = test.label(r);
    // max_element keeps the first maximum: lowest class id on ties.
    const auto pred = static_cast<std::size_t>(
        std::max_element(ws.scores.begin(), ws.scores.end()) - ws.scores.begin());
    const double z_y = ws.scores[y];
    loss += softmax_inplace(ws.scores) - z_y;
    ++support[y];
    if (pred == y) {
      ++correct;
      ++hits[y];
    }
  }
  EvalResult out;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  out.mean_loss = loss / static_cast<double>(test.size());
  out.per_class_recall.resize(spec.num_classes);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    out.per_class_recall[c] = support[c] == 0
                                  ? std::numeric_limits<double>::quiet_NaN()
                                  : static_cast<double>(hits[c]) / static_cast<double>(support[c]);
  }
  return out;
}

}  // namespace fedsim
