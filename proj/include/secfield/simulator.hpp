#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "secfield/codec.hpp"
#include "secfield/gaussian_field.hpp"
#include "secfield/random.hpp"

namespace secfield {

/// y = x + w with w ~ N(0, σ² I). σ² = 0 returns x unchanged.
std::vector<double> transmit(std::span<const double> x, double sigma_sq, std::mt19937_64& rng);

struct TrialRecord {
  std::uint64_t trial_id = 0;
  std::uint64_t message = 0;
  std::uint64_t decoded = 0;
  std::uint64_t bit_errors = 0;
  double flip_fraction = 0.0;  // f over the K+K̃ permuted symbols
  double overlap = 0.0;        // ⟨s̃; r̃⟩
  double overlap_sign = 0.0;   // ⟨s̃; sgn(r̃)⟩ = 1 − 2f
  bool bound_ok = false;       // f ≤ 1 − ⟨s̃; r̃⟩
};

TrialRecord run_trial(const CodecConfig& cfg, const GaussianField& field, const BinningPlan& plan,
                      std::uint64_t trial_id, const MmseOptions& mmse = {});

struct LeakageEstimate {
  std::uint64_t n_samples = 0;
  // Per channel use, nats: I(s; y_E | V, Π)/N = I(s̃; y_E | V)/N − I(k; y_E | s, V)/N.
  double message = 0.0;
  double message_se = 0.0;
  double codeword = 0.0;  // I(s̃; y_E | V)/N
  double codeword_se = 0.0;
  double key = 0.0;  // I(k; y_E | s, V)/N
  double key_se = 0.0;
  // message − (codeword − key), sample by sample.
  double chain_residual = 0.0;
  double chain_se = 0.0;
};

/// Monte Carlo estimate of the eavesdropper's information for a fixed (V, Π),
/// with exact log-domain marginalization over keys and over all inputs.
LeakageEstimate estimate_leakage(const CodecConfig& cfg, const GaussianField& field,
                                 const BinningPlan& plan, std::uint64_t n_samples,
                                 std::uint64_t stream_index = 0, const MmseOptions& mmse = {});

struct ExperimentOptions {
  // Pin V (resp. Π) to field_seed (resp. perm_seed) instead of redrawing per trial.
  bool freeze_field = false;
  bool freeze_plan = false;
  // Leakage samples on the trial-0 (V, Π); 0 skips the estimate.
  std::uint64_t leakage_samples = 0;
  unsigned threads = 1;
  std::uint64_t coefficient_budget = kDefaultCoefficientBudget;
  std::uint64_t enumeration_budget = kDefaultEnumerationBudget;
};

struct SimReport {
  CodecConfig config;
  ExperimentOptions options;
  std::uint64_t n_trials = 0;
  std::uint64_t k_tilde = 0;
  std::vector<TrialRecord> trials;
  double message_error_rate = 0.0;
  double nonzero_flip_rate = 0.0;  // fraction of trials with f > 0
  double mean_f = 0.0;
  double mean_f_se = 0.0;
  double mean_overlap = 0.0;
  double mean_overlap_se = 0.0;
  double mean_bit_error_rate = 0.0;
  bool all_bounds_ok = true;
  bool has_leakage = false;
  LeakageEstimate leakage;
  double wall_seconds = 0.0;
};

SimReport run_experiment(const CodecConfig& cfg, std::uint64_t n_trials,
                         const ExperimentOptions& options = {});

/// Field and plan used for a trial under the experiment's freeze flags.
GaussianField trial_field(const CodecConfig& cfg, std::uint64_t trial_id, bool freeze,
                          std::uint64_t coefficient_budget = kDefaultCoefficientBudget);
BinningPlan trial_plan(const CodecConfig& cfg, std::uint64_t trial_id, bool freeze);

}  // namespace secfield
