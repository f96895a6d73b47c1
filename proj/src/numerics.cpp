#include "secfield/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "secfield/errors.hpp"

namespace secfield {

namespace {

// Golub–Welsch eigenvalues of the Jacobi matrix for He_n (off-diagonal √k) as
// starting points, then Newton polish on the orthonormal recurrence in long
// double. Weights are Christoffel numbers 1 / Σ_k p_k(x)², already normalized
// to the standard normal measure.
void hermite_probabilists(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  if (n == 1) {
    w[0] = 1.0;
    return;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& guess = eig.eigenvalues();

  // p_0..p_{n-1} at z; returns p_n and Σ p_k² for k < n.
  const auto recur = [n](long double z, long double& pn, long double& pn1, long double& sum_sq) {
    long double prev = 0.0L, cur = 1.0L;
    sum_sq = 1.0L;
    for (int k = 0; k < n; ++k) {
      const long double next = (z * cur - std::sqrt(static_cast<long double>(k)) * prev) /
                               std::sqrt(static_cast<long double>(k + 1));
      prev = cur;
      cur = next;
      if (k + 1 < n) sum_sq += cur * cur;
    }
    pn = cur;
    pn1 = prev;
  };
  const int half = n / 2;
  for (int i = 0; i < half; ++i) {
    // Largest roots first; mirror onto the negative side.
    long double z = guess[n - 1 - i];
    long double pn = 0, pn1 = 0, sum_sq = 1;
    for (int it = 0; it < 8; ++it) {
      recur(z, pn, pn1, sum_sq);
      const long double step = pn / (std::sqrt(static_cast<long double>(n)) * pn1);
      z -= step;
      if (std::abs(step) <= 1e-19L * std::max(1.0L, std::abs(z))) break;
    }
    recur(z, pn, pn1, sum_sq);
    x[n - 1 - i] = static_cast<double>(z);
    x[i] = -x[n - 1 - i];
    w[i] = w[n - 1 - i] = static_cast<double>(1.0L / sum_sq);
  }
  if (n % 2 == 1) {
    long double pn = 0, pn1 = 0, sum_sq = 1;
    recur(0.0L, pn, pn1, sum_sq);
    w[half] = static_cast<double>(1.0L / sum_sq);
  }
}

}  // namespace

QuadratureRule QuadratureRule::gauss_hermite(int order) {
  if (order < 1) throw InputError("quadrature order must be positive");
  std::vector<double> x;
  std::vector<double> w;
  hermite_probabilists(order, x, w);
  const double total = pairwise_sum(w);
  for (double& wi : w) wi /= total;
  return QuadratureRule(std::move(x), std::move(w));
}

const QuadratureRule& default_quadrature() {
  static const QuadratureRule rule = QuadratureRule::gauss_hermite(kDefaultQuadratureOrder);
  return rule;
}

double gauss_expectation(const std::function<double(double)>& g, const QuadratureRule& rule) {
  const auto nodes = rule.nodes();
  const auto weights = rule.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double v = g(nodes[i]);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "integrand is not finite at quadrature node " << i << " (x = " << nodes[i] << ")";
      throw DomainError(msg.str());
    }
    acc += weights[i] * v;
  }
  return acc;
}

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double mx = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t mid = values.size() / 2;
  return pairwise_sum(values.first(mid)) + pairwise_sum(values.subspan(mid));
}

std::pair<double, double> mean_and_se(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  const auto n = static_cast<double>(values.size());
  const double mean = pairwise_sum(values) / n;
  if (values.size() < 2) return {mean, 0.0};
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
  const double var = pairwise_sum(sq) / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

namespace {

// lo + i·step drifts off the decimal value (0.1·17 = 1.7000000000000002);
// rounding to 15 significant digits removes the drift and nothing else.
double snap_decimal(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  const double snapped = std::strtod(buf, nullptr);
  return std::abs(snapped - x) <= 8.0 * std::numeric_limits<double>::epsilon() * std::abs(x)
             ? snapped
             : x;
}

}  // namespace

std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw InputError("grid step must be positive");
  std::vector<double> grid;
  if (lo > hi) return grid;
  const double span = hi - lo;
  const double ratio = span / step;
  const double nearest = std::round(ratio);
  const bool divides = std::abs(nearest * step - span) <= 1e-12 * std::max(1.0, std::abs(span));
  const auto count = static_cast<std::size_t>(divides ? nearest : std::floor(ratio));
  grid.reserve(count + 1);
  for (std::size_t i = 0; i <= count; ++i) grid.push_back(snap_decimal(lo + static_cast<double>(i) * step));
  if (divides) grid.back() = hi;
  return grid;
}

std::pair<double, double> golden_section(const std::function<double(double)>& f, double a,
                                         double b, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  double best_x = fc <= fd ? c : d;
  double best_f = std::min(fc, fd);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
      if (fc < best_f) best_f = fc, best_x = c;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
      if (fd < best_f) best_f = fd, best_x = d;
    }
    if (d <= c) break;  // bracket collapsed below double resolution
  }
  return {best_x, best_f};
}

ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                              const MinimizeOptions& options) {
  if (!(lo < hi)) throw InputError("minimize_scalar requires lo < hi");
  if (!(options.grid_step > 0.0)) throw InputError("grid step must be positive");
  if (!(options.refine_tol > 0.0)) throw InputError("refine tolerance must be positive");

  std::vector<double> grid = linear_grid(lo, hi, options.grid_step);
  if (grid.back() < hi) grid.push_back(hi);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = f(grid[i]);
    if (!std::isfinite(values[i])) {
      std::ostringstream msg;
      msg << "objective is not finite at grid point " << grid[i];
      throw DomainError(msg.str());
    }
  }

  struct Candidate {
    double x, v;
  };
  std::vector<Candidate> cands;
  cands.push_back({grid.front(), values.front()});
  const std::size_t last = grid.size() - 1;

  // Endpoints enter as plain grid values; only interior brackets are refined.
  for (std::size_t i = 1; i < last; ++i) {
    if (values[i] < values[i - 1] && values[i] <= values[i + 1]) {
      auto [x, v] = golden_section(f, grid[i - 1], grid[i + 1], options.refine_tol);
      if (values[i] <= v) x = grid[i], v = values[i];
      cands.push_back({x, v});
    }
  }
  cands.push_back({grid.back(), values.back()});

  std::sort(cands.begin(), cands.end(), [](const Candidate& l, const Candidate& r) {
    return l.x < r.x;
  });

  ScalarMinimum out;
  double best = cands.front().v;
  for (const auto& c : cands) best = std::min(best, c.v);
  double lowest_tied = hi;
  for (const auto& c : cands) {
    out.candidates.push_back(c.x);
    out.candidate_values.push_back(c.v);
    if (c.v <= best + options.tie_tol) {
      lowest_tied = std::min(lowest_tied, c.x);
      out.argmin = c.x;  // sorted ascending: the last tied candidate is the largest
      out.min_value = c.v;
    }
  }
  out.tie = out.argmin - lowest_tied > options.grid_step;
  return out;
}

double bisect_transition(const std::function<bool(double)>& indicator, double lo, double hi,
                         double tol) {
  if (!(lo < hi)) throw BracketError("bisection bracket is empty");
  if (!(tol > 0.0)) throw InputError("bisection tolerance must be positive");
  const bool at_lo = indicator(lo);
  if (at_lo == indicator(hi)) throw BracketError("indicator does not change across the bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (indicator(mid) == at_lo ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace secfield
