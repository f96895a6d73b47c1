#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "secfield/gaussian_field.hpp"

namespace secfield {

struct CovarianceRow {
  double inner = 0.0;   // ⟨s₁; s₂⟩
  double theory = 0.0;  // P·u^λ
  double same_output = 0.0;
  double same_output_se = 0.0;
  double cross_output = 0.0;  // E[V_n(s₁)·V_{n+1}(s₂)], theory 0
  double cross_output_se = 0.0;
  // E[V⁴] / (E[V²])² at s₁; 3 for a Gaussian.
  double kurtosis = 0.0;
};

/// Empirical covariance of freshly sampled fields at input pairs with the
/// requested normalized inner products. Each u must be reachable by flipping
/// an integer number of coordinates, (1 − u)·dim/2.
std::vector<CovarianceRow> field_covariance_check(const FieldSpec& base,
                                                  std::span<const double> inner_products,
                                                  std::uint64_t n_fields);

}  // namespace secfield
