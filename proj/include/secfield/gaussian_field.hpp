#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace secfield {

inline constexpr std::uint64_t kDefaultCoefficientBudget = std::uint64_t{1} << 27;

struct FieldSpec {
  std::uint64_t n_out = 1;  // N, channel uses
  std::uint64_t dim = 1;    // input dimension (K + K̃ in the codec)
  int order = 3;            // λ
  double power = 1.0;       // P = Φ(1)
  std::uint64_t seed = 0;

  void validate() const;
  /// N·dim^λ; throws ResourceError on 64-bit overflow.
  std::uint64_t coefficient_count() const;

  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

/// Throws InputError unless every entry is exactly ±1.
void require_bipolar(std::span<const double> s, std::size_t expected_len);

/// Random field V: {±1}^K → R^N with E[V_m(s₁)V_n(s₂)] = 1{m=n}·P·⟨s₁;s₂⟩^λ.
///
/// Realized as V_n(s) = √(P/K^λ) · Σ A[n, i₁..i_λ] s_{i₁}···s_{i_λ} with a full
/// (non-symmetrized) i.i.d. standard normal tensor A stored row-major, first
/// index most significant. Immutable once built; all methods are const.
class GaussianField {
 public:
  GaussianField(FieldSpec spec, std::vector<double> coefficients);

  const FieldSpec& spec() const { return spec_; }
  double scale() const { return scale_; }
  std::uint64_t terms_per_output() const { return terms_; }
  std::span<const double> coefficients() const { return coeffs_; }

  /// V(s); validates that s is bipolar of length dim.
  std::vector<double> evaluate(std::span<const double> s) const;

  /// V(s′) where s′ is s with coordinate `flip_index` negated, computed from
  /// base_output = V(s) by touching only monomials with an odd power of that
  /// coordinate.
  std::vector<double> evaluate_flipped(std::span<const double> s,
                                       std::span<const double> base_output,
                                       std::size_t flip_index) const;

  // Unchecked kernels used by the enumerators. `s` is the state before the flip.
  void evaluate_into(std::span<const double> s, std::span<double> out) const;
  void apply_flip(std::span<const double> s, std::size_t flip_index, std::span<double> out) const;

  /// Binary dump: "SFGF", u32 version, spec fields, u64 count, then f64
  /// coefficients, all little-endian.
  void save(std::ostream& os) const;
  static GaussianField load(std::istream& is);

 private:
  double monomial(std::uint64_t flat, std::span<const double> s) const;

  FieldSpec spec_;
  std::uint64_t terms_ = 0;
  double scale_ = 0.0;
  std::vector<double> coeffs_;
  // odd_terms_[j]: flat indices whose multi-index contains j an odd number of times.
  std::vector<std::vector<std::uint32_t>> odd_terms_;
};

/// Draws an i.i.d. N(0,1) coefficient tensor from spec.seed.
GaussianField sample_field(const FieldSpec& spec,
                           std::uint64_t coefficient_budget = kDefaultCoefficientBudget);

inline constexpr std::uint32_t kFieldFormatVersion = 1;

}  // namespace secfield
