#include "secfield/channel_math.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "secfield/errors.hpp"

namespace secfield {

void WiretapParams::validate() const {
  if (!(power > 0.0) || !(sigma_b_sq > 0.0) || !(sigma_e_sq > 0.0)) {
    throw ConfigError("power and noise variances must be strictly positive");
  }
}

double awgn_capacity(double snr) {
  if (!(snr >= 0.0)) throw DomainError("AWGN capacity needs a non-negative SNR");
  return 0.5 * std::log1p(snr);
}

double secrecy_capacity(const WiretapParams& p) {
  p.validate();
  const double diff = awgn_capacity(p.power / p.sigma_b_sq) - awgn_capacity(p.power / p.sigma_e_sq);
  return diff > 0.0 ? diff : 0.0;
}

std::uint64_t key_length(std::uint64_t n, double power, double sigma_e_sq) {
  if (n == 0) throw InputError("key_length needs n >= 1");
  if (!(power > 0.0) || !(sigma_e_sq > 0.0)) {
    throw ConfigError("key_length needs positive power and noise variance");
  }
  const double ce = awgn_capacity(power / sigma_e_sq);
  if (!(ce > 0.0)) throw ConfigError("eavesdropper capacity is zero: no key symbols");
  // Round off the last ulp so exact multiples (e.g. σ_E² = P gives N/2) do not overshoot.
  const double raw = static_cast<double>(n) * ce / std::numbers::ln2;
  const double snapped = std::round(raw);
  const bool near_integer = snapped >= 1.0 && std::abs(raw - snapped) <= 1e-12 * std::max(1.0, raw);
  const double value = near_integer ? snapped : std::ceil(raw);
  return static_cast<std::uint64_t>(value);
}

std::uint64_t bin_size(std::uint64_t k, std::uint64_t k_tilde) {
  if (k == 0 || k_tilde == 0) throw InputError("bin_size needs k, k_tilde >= 1");
  return 1 + (k + k_tilde - 1) / k_tilde;
}

double critical_rate_heuristic(double power, double sigma_sq) {
  if (!(power > 0.0) || !(sigma_sq > 0.0)) {
    throw DomainError("critical rate needs positive power and noise variance");
  }
  return awgn_capacity(power / sigma_sq) / std::numbers::ln2;
}

std::uint64_t message_length_at_secrecy_capacity(std::uint64_t n, const WiretapParams& p) {
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(n) * secrecy_capacity(p) /
                                               std::numbers::ln2));
}

}  // namespace secfield
