#include "secfield/field_check.hpp"

#include <cmath>
#include <random>
#include <string>

#include "secfield/errors.hpp"
#include "secfield/numerics.hpp"
#include "secfield/random.hpp"

namespace secfield {

std::vector<CovarianceRow> field_covariance_check(const FieldSpec& base,
                                                  std::span<const double> inner_products,
                                                  std::uint64_t n_fields) {
  base.validate();
  if (n_fields < 2) throw InputError("covariance check needs at least two fields");
  if (base.n_out < 2) throw InputError("covariance check needs n_out >= 2 for cross terms");

  const auto dim = static_cast<double>(base.dim);
  std::mt19937_64 pick(derive_seed(base.seed, 0, StreamTag::kFieldCheck));
  std::vector<double> s1(base.dim);
  for (double& v : s1) v = (pick() >> 63) != 0 ? 1.0 : -1.0;

  std::vector<std::vector<double>> partners;
  for (double u : inner_products) {
    const double flips = (1.0 - u) * dim / 2.0;
    const double rounded = std::round(flips);
    if (u < -1.0 || u > 1.0 || std::abs(flips - rounded) > 1e-9) {
      throw InputError("inner product " + std::to_string(u) + " is not reachable with dim " +
                       std::to_string(base.dim));
    }
    std::vector<double> s2 = s1;
    for (std::size_t i = 0; i < static_cast<std::size_t>(rounded); ++i) s2[i] = -s2[i];
    partners.push_back(std::move(s2));
  }

  const std::size_t n_out = base.n_out;
  const std::size_t per_row = n_fields * n_out;
  std::vector<std::vector<double>> same(partners.size()), cross(partners.size());
  for (std::size_t r = 0; r < partners.size(); ++r) {
    same[r].reserve(per_row);
    cross[r].reserve(per_row);
  }
  std::vector<double> sq, quad;
  sq.reserve(per_row);
  quad.reserve(per_row);

  for (std::uint64_t i = 0; i < n_fields; ++i) {
    FieldSpec spec = base;
    spec.seed = derive_seed(base.seed, i, StreamTag::kField);
    const GaussianField field = sample_field(spec);
    const std::vector<double> v1 = field.evaluate(s1);
    for (double v : v1) {
      sq.push_back(v * v);
      quad.push_back(v * v * v * v);
    }
    for (std::size_t r = 0; r < partners.size(); ++r) {
      const std::vector<double> v2 = field.evaluate(partners[r]);
      for (std::size_t n = 0; n < n_out; ++n) {
        same[r].push_back(v1[n] * v2[n]);
        cross[r].push_back(v1[n] * v2[(n + 1) % n_out]);
      }
    }
  }

  const double m2 = mean_and_se(sq).first;
  const double m4 = mean_and_se(quad).first;
  std::vector<CovarianceRow> rows;
  for (std::size_t r = 0; r < partners.size(); ++r) {
    CovarianceRow row;
    row.inner = inner_products[r];
    row.theory = base.power * std::pow(row.inner, base.order);
    std::tie(row.same_output, row.same_output_se) = mean_and_se(same[r]);
    std::tie(row.cross_output, row.cross_output_se) = mean_and_se(cross[r]);
    row.kurtosis = m4 / (m2 * m2);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace secfield
