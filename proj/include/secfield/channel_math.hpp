#pragma once

#include <cstdint>

namespace secfield {

// All information quantities are in nats unless a name says otherwise.
// Rates R count binary symbols per channel use, so "R log 2" is in nats.

struct WiretapParams {
  double power = 1.0;       // average transmit power P
  double sigma_b_sq = 0.1;  // legitimate receiver noise variance
  double sigma_e_sq = 1.0;  // eavesdropper noise variance

  void validate() const;
};

/// ½ log(1 + snr).
double awgn_capacity(double snr);

/// [C(P/σ_B²) − C(P/σ_E²)]⁺.
double secrecy_capacity(const WiretapParams& p);

/// Number of key symbols ⌈(N / log 2) · C(P/σ_E²)⌉.
std::uint64_t key_length(std::uint64_t n, double power, double sigma_e_sq);

/// Bin size ⌈1 + K/K̃⌉, computed in integer arithmetic.
std::uint64_t bin_size(std::uint64_t k, std::uint64_t k_tilde);

/// Heuristic all-or-nothing rate C(P/σ²) / log 2.
double critical_rate_heuristic(double power, double sigma_sq);

/// Message length at the secrecy capacity, ⌊N · C_S / log 2⌋.
std::uint64_t message_length_at_secrecy_capacity(std::uint64_t n, const WiretapParams& p);

}  // namespace secfield
