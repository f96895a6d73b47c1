#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace secfield {

/// Gauss–Hermite rule for expectations over w ~ N(0, 1).
///
/// Nodes are the probabilists' Hermite roots, symmetric about zero; weights
/// are normalized to sum to one so that `gauss_expectation(g)` approximates
/// E[g(w)] directly. Exact for polynomials of degree up to 2·order − 1.
class QuadratureRule {
 public:
  static QuadratureRule gauss_hermite(int order);

  int order() const { return static_cast<int>(nodes_.size()); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

 private:
  QuadratureRule(std::vector<double> nodes, std::vector<double> weights)
      : nodes_(std::move(nodes)), weights_(std::move(weights)) {}

  std::vector<double> nodes_;
  std::vector<double> weights_;
};

inline constexpr int kDefaultQuadratureOrder = 320;

/// Process-wide default rule, built once.
const QuadratureRule& default_quadrature();

/// Σ wᵢ g(xᵢ). Throws DomainError naming the node if g is not finite there.
double gauss_expectation(const std::function<double(double)>& g, const QuadratureRule& rule);

/// log cosh(x) without overflow: |x| + log1p(exp(−2|x|)) − log 2.
double log_cosh(double x);

/// log Σ exp(vᵢ); −inf for an empty span.
double log_sum_exp(std::span<const double> values);

/// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

/// Sample mean and its standard error (pairwise summation).
std::pair<double, double> mean_and_se(std::span<const double> values);

struct ScalarMinimum {
  double argmin = 0.0;
  double min_value = 0.0;
  // More than one basin attains the minimum within the tie tolerance.
  bool tie = false;
  // Refined local minima and both endpoints, in increasing argument order.
  std::vector<double> candidates;
  std::vector<double> candidate_values;
};

struct MinimizeOptions {
  double grid_step = 1e-3;
  double refine_tol = 1e-10;
  double tie_tol = 1e-12;
};

/// Global minimum of f on [lo, hi].
///
/// Evaluates f on the closed grid lo, lo+step, ..., hi, refines every
/// locally-minimal bracket by golden-section search and compares the refined
/// values against both endpoints. Candidates within `tie_tol` of the best are
/// considered tied and the largest argument wins.
ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                              const MinimizeOptions& options = {});

/// Golden-section search on [a, b] until the bracket is no wider than tol.
/// Returns the best evaluated point.
std::pair<double, double> golden_section(const std::function<double(double)>& f, double a,
                                         double b, double tol);

/// Point where a monotone indicator flips inside [lo, hi], to within tol.
/// Throws BracketError when indicator(lo) == indicator(hi).
double bisect_transition(const std::function<bool(double)>& indicator, double lo, double hi,
                         double tol);

/// Evenly spaced grid lo, lo+step, ... up to hi; hi is included when step
/// divides the span within 1e-12. Empty when lo > hi.
std::vector<double> linear_grid(double lo, double hi, double step);

}  // namespace secfield
