#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "secfield/channel_math.hpp"
#include "secfield/gaussian_field.hpp"

namespace secfield {

inline constexpr std::uint64_t kDefaultEnumerationBudget = 24;

struct CodecConfig {
  std::uint64_t n = 16;  // channel uses N
  std::uint64_t k = 4;   // message bits K
  // Replaces key_length(N, P, σ_E²) when set.
  std::optional<std::uint64_t> k_tilde_override;
  int order = 3;
  // Permits λ ∈ {1, 2}; the scheme itself requires λ ≥ 3.
  bool allow_ablation = false;
  double power = 1.0;
  double sigma_b_sq = 0.01;
  double sigma_e_sq = 1.0;
  std::uint64_t field_seed = 1;
  std::uint64_t perm_seed = 2;
  std::uint64_t key_seed = 3;
  std::uint64_t noise_seed = 4;

  void validate() const;
  std::uint64_t k_tilde() const;
  std::uint64_t total_dim() const { return k + k_tilde(); }
  WiretapParams wiretap() const { return {power, sigma_b_sq, sigma_e_sq}; }
  FieldSpec field_spec(std::uint64_t seed) const;
  FieldSpec field_spec() const { return field_spec(field_seed); }
};

/// Key-interleaving permutation: slot i of [kᵀ, sᵀ]ᵀ lands at s̃[permutation[i]].
/// Slots 0..K̃−1 hold the key, K̃..K̃+K−1 the message.
struct BinningPlan {
  std::uint64_t k = 0;
  std::uint64_t k_tilde = 0;
  std::uint64_t bin_size = 0;  // B = ⌈1 + K/K̃⌉
  // K̃ + 1 boundaries; bin ℓ covers [bin_starts[ℓ], bin_starts[ℓ+1]).
  std::vector<std::uint64_t> bin_starts;
  // Bins are [ℓB, min((ℓ+1)B, K+K̃)) when that layout leaves no bin empty;
  // otherwise K̃ balanced contiguous bins, each no larger than B.
  bool nominal_layout = true;
  std::vector<std::uint32_t> permutation;
  std::vector<std::uint32_t> key_positions;  // permutation[0..K̃)

  std::uint64_t total() const { return k + k_tilde; }

  std::vector<double> apply(std::span<const double> v) const;   // v ↦ Πv
  std::vector<double> invert(std::span<const double> v) const;  // v ↦ Πᵀv

  /// Bijection plus exactly one key position per bin; throws ConfigError otherwise.
  void check_invariants() const;
  bool one_key_per_bin() const;

  /// Wraps an arbitrary permutation (bins are laid out but not enforced).
  static BinningPlan from_permutation(std::uint64_t k, std::uint64_t k_tilde,
                                      std::vector<std::uint32_t> permutation);
};

/// Bin boundaries for (K, K̃) as used by build_binning.
std::vector<std::uint64_t> bin_boundaries(std::uint64_t k, std::uint64_t k_tilde,
                                          bool* nominal_layout = nullptr);

/// Each bin receives one key symbol at a uniformly drawn position; message
/// symbols fill the remaining positions in uniformly random order.
BinningPlan build_binning(std::uint64_t k, std::uint64_t k_tilde, std::uint64_t perm_seed);

/// Bit i of m ↦ entry i: 0 → −1, 1 → +1.
std::vector<double> message_to_bipolar(std::uint64_t m, std::uint64_t k);
std::uint64_t bipolar_to_message(std::span<const double> s);

struct EncodedFrame {
  std::uint64_t m = 0;
  std::vector<double> s;
  std::vector<double> key;
  std::vector<double> s_tilde;
  std::vector<double> x;
};

EncodedFrame encode(const CodecConfig& cfg, const GaussianField& field, const BinningPlan& plan,
                    std::uint64_t m, std::span<const double> key);

struct MmseOptions {
  std::uint64_t max_dim = kDefaultEnumerationBudget;
  // Contiguous Gray-code sub-ranges merged by log-sum-exp.
  unsigned chunks = 1;
  unsigned threads = 1;
  bool reverse = false;
};

struct MmseResult {
  std::vector<double> r;  // posterior mean, |r_k| ≤ 1
  // log Σ_u exp(−‖y − V(u)‖² / 2σ²)
  double log_partition = 0.0;
};

/// Exact posterior mean of s̃ given y under a uniform prior, by Gray-code
/// enumeration of all 2^dim bipolar inputs.
MmseResult mmse_estimate(const GaussianField& field, std::span<const double> y, double sigma_sq,
                         const MmseOptions& options = {});

/// log Σ exp(−‖y − V(u)‖² / 2σ²) over u that agree with `base` outside
/// `free_coords` and range over all 2^|free| sign patterns on them.
double log_partition_over(const GaussianField& field, std::span<const double> y, double sigma_sq,
                          std::span<const double> base, std::span<const std::uint32_t> free_coords,
                          const MmseOptions& options = {});

struct DecodedMessage {
  std::uint64_t m = 0;
  std::vector<double> s_hat;
};

/// r = Πᵀ r̃, ŝ_k = sgn(r_{K̃+k}) with sgn(0) = +1.
DecodedMessage decode(const CodecConfig& cfg, const BinningPlan& plan,
                      std::span<const double> r_tilde);

/// Line-oriented frame record (see README for the layout).
void write_frame(std::ostream& os, const CodecConfig& cfg, const EncodedFrame& frame);

struct FrameRecord {
  std::uint64_t field_seed = 0, perm_seed = 0, key_seed = 0, noise_seed = 0;
  EncodedFrame frame;
};
FrameRecord read_frame(std::istream& is);

}  // namespace secfield
