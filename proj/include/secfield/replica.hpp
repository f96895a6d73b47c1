#pragma once

#include <vector>

#include "secfield/numerics.hpp"

namespace secfield {

/// Decoupled-setting parameters for a field with covariance Φ(u) = P·u^λ.
///
/// `rate` is the generic input-symbols-per-channel-use ratio: K/N for plain
/// inference, (K+K̃)/N for end-to-end decoding, K̃/N for the genie-aided
/// eavesdropper. The engine has no notion of keys or bins.
struct ReplicaConfig {
  double rate = 1.0;
  double sigma_sq = 0.1;
  double power = 1.0;
  int order = 3;
  const QuadratureRule* quadrature = &default_quadrature();
  double grid_step = 1e-3;
  double refine_tol = 1e-10;

  void validate() const;
  const QuadratureRule& rule() const { return *quadrature; }
};

/// Minimizer of the energy function and its diagnostics.
struct ReplicaSolution {
  double m_star = 0.0;
  double info_rate = 0.0;  // L(m*), nats per channel use
  double energy_at_0 = 0.0;
  double energy_at_1 = 0.0;
  // |m* − E_w tanh(√E(m*)·w + E(m*))|
  double fixed_point_residual = 0.0;
  bool tie_flag = false;
  // Zeros of m ↦ E_w tanh(...) − m found on the grid (local minima and maxima of L).
  std::vector<double> stationary_points;
};

enum class OverlapRegime { kZero, kPartial, kFull };

/// Regime of an overlap value, clamping within 1e-9 of either end.
OverlapRegime classify_overlap(double m);

double phi(double u, double power, int order);
double phi_prime(double u, double power, int order);

/// E(m) = Φ′(m) / (R·(σ₀² + Φ(1) − Φ(m))).
double effective_snr(double m, const ReplicaConfig& cfg);

/// E − E_w log cosh(E + √E·w): mutual information of a ±1 input at SNR E.
double binary_input_mi(double snr, const QuadratureRule& rule);

/// E_w tanh(E + √E·w): overlap of the scalar MMSE estimator at SNR E.
double binary_input_overlap(double snr, const QuadratureRule& rule);

/// I_D(m).
double decoupled_mi(double m, const ReplicaConfig& cfg);

/// C_D(m) = C((Φ(1) − Φ(m)) / σ₀²) and its analytic derivative.
double cd(double m, const ReplicaConfig& cfg);
double cd_prime(double m, const ReplicaConfig& cfg);

/// L(m) = R·I_D(m) + C_D(m) + (1 − m)·C_D′(m).
double energy(double m, const ReplicaConfig& cfg);

/// m − E_w tanh(√E(m)·w + E(m)); zero at every stationary point of L.
double fixed_point_map_residual(double m, const ReplicaConfig& cfg);

ReplicaSolution solve_overlap(const ReplicaConfig& cfg);

struct RatePoint {
  double rate;
  ReplicaSolution solution;
};

/// One solution per rate of linear_grid(lo, hi, step), evaluated on up to
/// `threads` workers. Output order is the grid order regardless of threads.
std::vector<RatePoint> scan_rates(const ReplicaConfig& cfg_template, double rate_lo,
                                  double rate_hi, double rate_step, unsigned threads = 1);

/// Rate at which the overlap jumps discontinuously across ½.
///
/// Bisects on [m* < ½] and then requires a first-order jump (|Δm*| ≥ 0.25)
/// across the final bracket; a continuous crossing (linear fields) or an
/// unchanged regime raises BracketError.
double locate_critical_rate(const ReplicaConfig& cfg_template, double bracket_lo,
                            double bracket_hi, double tol);

}  // namespace secfield
