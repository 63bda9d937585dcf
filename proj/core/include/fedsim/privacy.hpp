#pragma once

#include "fedsim/labelstats.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

class PrivacyBudget {
 public:
  // Throws DomainError unless epsilon is positive and finite.
  explicit PrivacyBudget(double epsilon);

  double epsilon() const { return epsilon_; }
  // Laplace scale for a sensitivity-1 count query.
  double laplace_scale() const { return 1.0 / epsilon_; }

 private:
  double epsilon_;
};

// Inverse CDF of the zero-mean Laplace distribution at u - 1/2, for
// u_centered in (-0.5, 0.5): -scale * sign(u) * ln(1 - 2|u|).
double laplace_from_centered_uniform(double scale, double u_centered);

// One Laplace(0, scale) draw. Consumes exactly one 64-bit word.
// Throws DomainError if scale <= 0.
double laplace_sample(double scale, Rng& rng);

// Adds i.i.d. Laplace(1/epsilon) noise to each component (one draw per
// class, in class order), then clamps at 0. An all-zero result is replaced
// by all ones so the output always has positive total.
LabelCounts privatize_counts(const LabelCounts& counts, const PrivacyBudget& budget, Rng& rng);

// Unclamped variant. Returns the raw noised components, which may be
// negative and therefore are not a LabelCounts.
std::vector<double> privatize_counts_raw(const LabelCounts& counts, const PrivacyBudget& budget,
                                         Rng& rng);

}  // namespace fedsim
