#include "secfield/replica.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "secfield/channel_math.hpp"
#include "secfield/errors.hpp"

namespace secfield {

namespace {

double int_pow(double u, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= u;
  return out;
}

}  // namespace

void ReplicaConfig::validate() const {
  if (!(rate > 0.0)) throw ConfigError("replica rate must be positive");
  if (!(sigma_sq > 0.0)) throw ConfigError("noise variance must be positive");
  if (!(power > 0.0)) throw ConfigError("power must be positive");
  if (order < 1) throw ConfigError("covariance order must be >= 1");
  if (quadrature == nullptr) throw ConfigError("replica config has no quadrature rule");
  if (!(grid_step > 0.0) || !(refine_tol > 0.0)) {
    throw ConfigError("grid step and refine tolerance must be positive");
  }
}

OverlapRegime classify_overlap(double m) {
  if (m < 1e-9) return OverlapRegime::kZero;
  if (m > 1.0 - 1e-9) return OverlapRegime::kFull;
  return OverlapRegime::kPartial;
}

double phi(double u, double power, int order) { return power * int_pow(u, order); }

double phi_prime(double u, double power, int order) {
  return power * order * int_pow(u, order - 1);
}

double effective_snr(double m, const ReplicaConfig& cfg) {
  const double denom =
      cfg.rate * (cfg.sigma_sq + phi(1.0, cfg.power, cfg.order) - phi(m, cfg.power, cfg.order));
  return phi_prime(m, cfg.power, cfg.order) / denom;
}

double binary_input_mi(double snr, const QuadratureRule& rule) {
  if (snr <= 0.0) return 0.0;
  const double root = std::sqrt(snr);
  return snr - gauss_expectation([&](double w) { return log_cosh(snr + root * w); }, rule);
}

double binary_input_overlap(double snr, const QuadratureRule& rule) {
  if (snr <= 0.0) return 0.0;
  const double root = std::sqrt(snr);
  return gauss_expectation([&](double w) { return std::tanh(snr + root * w); }, rule);
}

double decoupled_mi(double m, const ReplicaConfig& cfg) {
  return binary_input_mi(effective_snr(m, cfg), cfg.rule());
}

double cd(double m, const ReplicaConfig& cfg) {
  const double gap = phi(1.0, cfg.power, cfg.order) - phi(m, cfg.power, cfg.order);
  return 0.5 * std::log1p(gap / cfg.sigma_sq);
}

double cd_prime(double m, const ReplicaConfig& cfg) {
  const double gap = phi(1.0, cfg.power, cfg.order) - phi(m, cfg.power, cfg.order);
  return -phi_prime(m, cfg.power, cfg.order) / (2.0 * (cfg.sigma_sq + gap));
}

double energy(double m, const ReplicaConfig& cfg) {
  return cfg.rate * decoupled_mi(m, cfg) + cd(m, cfg) + (1.0 - m) * cd_prime(m, cfg);
}

double fixed_point_map_residual(double m, const ReplicaConfig& cfg) {
  return m - binary_input_overlap(effective_snr(m, cfg), cfg.rule());
}

namespace {

std::vector<double> stationary_points(const ReplicaConfig& cfg) {
  std::vector<double> grid = linear_grid(0.0, 1.0, cfg.grid_step);
  if (grid.back() < 1.0) grid.push_back(1.0);
  std::vector<double> res(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) res[i] = fixed_point_map_residual(grid[i], cfg);
  std::vector<double> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (res[i] == 0.0) {
      out.push_back(grid[i]);
      continue;
    }
    if (i + 1 < grid.size() && res[i + 1] != 0.0 && (res[i] < 0.0) != (res[i + 1] < 0.0)) {
      const bool neg_lo = res[i] < 0.0;
      out.push_back(bisect_transition(
          [&](double m) { return (fixed_point_map_residual(m, cfg) < 0.0) != neg_lo; }, grid[i],
          grid[i + 1], 1e-14));
    }
  }
  return out;
}

// Root of the fixed-point residual near an interior minimizer, if the
// residual changes sign within one grid cell on either side.
double polish_interior(double m, const ReplicaConfig& cfg) {
  const double lo = std::max(0.0, m - cfg.grid_step);
  const double hi = std::min(1.0, m + cfg.grid_step);
  const double r_lo = fixed_point_map_residual(lo, cfg);
  const double r_hi = fixed_point_map_residual(hi, cfg);
  if (r_lo == 0.0 || r_hi == 0.0 || (r_lo < 0.0) == (r_hi < 0.0)) return m;
  const bool neg_lo = r_lo < 0.0;
  return bisect_transition(
      [&](double x) { return (fixed_point_map_residual(x, cfg) < 0.0) != neg_lo; }, lo, hi,
      1e-15);
}

}  // namespace

ReplicaSolution solve_overlap(const ReplicaConfig& cfg) {
  cfg.validate();
  const auto f = [&](double m) { return energy(m, cfg); };
  MinimizeOptions opts;
  opts.grid_step = cfg.grid_step;
  opts.refine_tol = cfg.refine_tol;
  const ScalarMinimum min = minimize_scalar(f, 0.0, 1.0, opts);

  ReplicaSolution sol;
  sol.m_star = min.argmin;
  sol.tie_flag = min.tie;
  if (sol.m_star > 0.0 && sol.m_star < 1.0) {
    const double polished = polish_interior(sol.m_star, cfg);
    if (f(polished) <= min.min_value + opts.tie_tol) sol.m_star = polished;
  }
  sol.info_rate = f(sol.m_star);
  sol.energy_at_0 = f(0.0);
  sol.energy_at_1 = f(1.0);
  sol.fixed_point_residual = std::abs(fixed_point_map_residual(sol.m_star, cfg));
  sol.stationary_points = stationary_points(cfg);
  return sol;
}

std::vector<RatePoint> scan_rates(const ReplicaConfig& cfg_template, double rate_lo,
                                  double rate_hi, double rate_step, unsigned threads) {
  const std::vector<double> rates = linear_grid(rate_lo, rate_hi, rate_step);
  std::vector<RatePoint> out(rates.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      ReplicaConfig cfg = cfg_template;
      cfg.rate = rates[i];
      out[i] = {rates[i], solve_overlap(cfg)};
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(rates.size())));
  if (threads <= 1) {
    work(0, rates.size());
    return out;
  }
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (rates.size() + threads - 1) / threads;
    for (std::size_t begin = 0; begin < rates.size(); begin += chunk) {
      pool.emplace_back(work, begin, std::min(rates.size(), begin + chunk));
    }
  }
  return out;
}

double locate_critical_rate(const ReplicaConfig& cfg_template, double bracket_lo,
                            double bracket_hi, double tol) {
  auto overlap_at = [&](double rate) {
    ReplicaConfig cfg = cfg_template;
    cfg.rate = rate;
    return solve_overlap(cfg).m_star;
  };
  const auto below_half = [&](double rate) { return overlap_at(rate) < 0.5; };
  const double rate = bisect_transition(below_half, bracket_lo, bracket_hi, tol);
  const double jump = overlap_at(rate - 0.5 * tol) - overlap_at(rate + 0.5 * tol);
  if (std::abs(jump) < 0.25) {
    throw BracketError(
        "overlap crosses 1/2 continuously: no first-order transition in the bracket "
        "(linear fields never reach zero overlap)");
  }
  return rate;
}

}  // namespace secfield
