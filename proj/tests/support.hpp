#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls the enumerators or the flip-update kernels under test.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "secfield/codec.hpp"
#include "secfield/gaussian_field.hpp"
#include "secfield/numerics.hpp"

namespace secfield::testing {

/// V(u) by explicit multi-index loops over the raw coefficients, in long double.
inline std::vector<long double> direct_eval(const GaussianField& field, std::span<const double> u) {
  const auto& spec = field.spec();
  const auto coeffs = field.coefficients();
  const std::uint64_t terms = field.terms_per_output();
  std::vector<long double> out(spec.n_out, 0.0L);
  std::vector<std::uint64_t> idx(spec.order, 0);
  for (std::uint64_t n = 0; n < spec.n_out; ++n) {
    long double acc = 0.0L;
    for (std::uint64_t flat = 0; flat < terms; ++flat) {
      // Decode flat → (i₁..i_λ), first index most significant.
      std::uint64_t rest = flat;
      long double prod = 1.0L;
      for (int level = spec.order - 1; level >= 0; --level) {
        idx[level] = rest % spec.dim;
        rest /= spec.dim;
      }
      for (int level = 0; level < spec.order; ++level) prod *= u[idx[level]];
      acc += static_cast<long double>(coeffs[n * terms + flat]) * prod;
    }
    out[n] = acc * std::sqrt(static_cast<long double>(spec.power) / static_cast<long double>(terms));
  }
  return out;
}

/// All 2^dim bipolar vectors, index bit i ↦ coordinate i.
inline std::vector<std::vector<double>> all_bipolar(std::uint64_t dim) {
  std::vector<std::vector<double>> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << dim); ++m) {
    std::vector<double> u(dim);
    for (std::uint64_t i = 0; i < dim; ++i) u[i] = ((m >> i) & 1u) ? 1.0 : -1.0;
    out.push_back(std::move(u));
  }
  return out;
}

/// Posterior mean by direct summation over all inputs, long double throughout.
inline std::vector<long double> brute_force_posterior_mean(const GaussianField& field,
                                                           std::span<const double> y,
                                                           double sigma_sq) {
  const auto inputs = all_bipolar(field.spec().dim);
  std::vector<long double> logw;
  for (const auto& u : inputs) {
    const auto v = direct_eval(field, u);
    long double sq = 0.0L;
    for (std::size_t n = 0; n < v.size(); ++n) sq += (y[n] - v[n]) * (y[n] - v[n]);
    logw.push_back(-sq / (2.0L * sigma_sq));
  }
  long double mx = logw[0];
  for (auto l : logw) mx = std::max(mx, l);
  long double z = 0.0L;
  std::vector<long double> num(field.spec().dim, 0.0L);
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    const long double w = std::exp(logw[j] - mx);
    z += w;
    for (std::size_t k = 0; k < num.size(); ++k) num[k] += w * inputs[j][k];
  }
  for (auto& v : num) v /= z;
  return num;
}

struct LeakageOracle {
  double codeword = 0.0;  // I(s~; y_E | V) / N
  double message = 0.0;   // I(s; y_E | V, Pi) / N
  double key = 0.0;       // I(k; y_E | s, V) / N
};

/// Eavesdropper mutual informations per channel use by tensor-product
/// Gauss-Hermite integration over the N-dimensional noise, exact sums over
/// all codewords. Feasible for N <= 4 and a handful of inputs.
inline LeakageOracle leakage_by_quadrature(const CodecConfig& cfg, const GaussianField& field,
                                           const BinningPlan& plan, int nodes_per_dim) {
  const std::uint64_t kt = cfg.k_tilde();
  const std::uint64_t total = cfg.k + kt;
  const std::size_t n = cfg.n;
  // Codeword for stacked index (key bits low, message bits high).
  std::vector<std::vector<long double>> x;
  for (const auto& stacked : all_bipolar(total)) {
    x.push_back(direct_eval(field, plan.apply(stacked)));
  }
  const std::size_t count = x.size();
  const std::size_t keys = std::size_t{1} << kt;
  const auto rule = QuadratureRule::gauss_hermite(nodes_per_dim);
  const long double sigma = std::sqrt(static_cast<long double>(cfg.sigma_e_sq));
  const long double inv_two_var = 0.5L / cfg.sigma_e_sq;

  std::size_t grid = 1;
  for (std::size_t d = 0; d < n; ++d) grid *= static_cast<std::size_t>(nodes_per_dim);
  long double cw = 0.0L, msg = 0.0L, key = 0.0L;
  std::vector<long double> y(n), logw(count);
  for (std::size_t u = 0; u < count; ++u) {
    for (std::size_t g = 0; g < grid; ++g) {
      std::size_t rest = g;
      long double weight = 1.0L, w_sq = 0.0L;
      for (std::size_t d = 0; d < n; ++d) {
        const std::size_t idx = rest % nodes_per_dim;
        rest /= nodes_per_dim;
        const long double w = rule.nodes()[idx];
        weight *= rule.weights()[idx];
        w_sq += w * w;
        y[d] = x[u][d] + sigma * w;
      }
      long double mx = -1e300L;
      for (std::size_t v = 0; v < count; ++v) {
        long double sq = 0.0L;
        for (std::size_t d = 0; d < n; ++d) sq += (y[d] - x[v][d]) * (y[d] - x[v][d]);
        logw[v] = -sq * inv_two_var;
        mx = std::max(mx, logw[v]);
      }
      long double z_all = 0.0L, z_msg = 0.0L;
      const std::size_t msg_block = u / keys;
      for (std::size_t v = 0; v < count; ++v) {
        const long double e = std::exp(logw[v] - mx);
        z_all += e;
        if (v / keys == msg_block) z_msg += e;
      }
      const long double log_true = -w_sq / 2.0L;
      const long double log_p = mx + std::log(z_all / count);
      const long double log_p_s = mx + std::log(z_msg / keys);
      cw += weight * (log_true - log_p);
      msg += weight * (log_p_s - log_p);
      key += weight * (log_true - log_p_s);
    }
  }
  LeakageOracle out;
  out.codeword = static_cast<double>(cw / count / n);
  out.message = static_cast<double>(msg / count / n);
  out.key = static_cast<double>(key / count / n);
  return out;
}

}  // namespace secfield::testing
