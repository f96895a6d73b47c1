#include "secfield/gaussian_field.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "secfield/errors.hpp"

namespace secfield {

void FieldSpec::validate() const {
  if (n_out < 1 || dim < 1) throw ConfigError("field needs n_out >= 1 and dim >= 1");
  if (order < 1) throw ConfigError("field order must be >= 1");
  if (!(power > 0.0)) throw ConfigError("field power must be positive");
}

std::uint64_t FieldSpec::coefficient_count() const {
  std::uint64_t count = n_out;
  for (int i = 0; i < order; ++i) {
    if (count > std::numeric_limits<std::uint64_t>::max() / dim) {
      throw ResourceError("field coefficient count overflows 64 bits");
    }
    count *= dim;
  }
  return count;
}

void require_bipolar(std::span<const double> s, std::size_t expected_len) {
  if (s.size() != expected_len) {
    std::ostringstream msg;
    msg << "expected a bipolar vector of length " << expected_len << ", got " << s.size();
    throw InputError(msg.str());
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != 1.0 && s[i] != -1.0) {
      std::ostringstream msg;
      msg << "entry " << i << " is " << s[i] << ", not +-1";
      throw InputError(msg.str());
    }
  }
}

GaussianField::GaussianField(FieldSpec spec, std::vector<double> coefficients)
    : spec_(spec), coeffs_(std::move(coefficients)) {
  spec_.validate();
  const std::uint64_t count = spec_.coefficient_count();
  if (coeffs_.size() != count) {
    std::ostringstream msg;
    msg << "field needs " << count << " coefficients, got " << coeffs_.size();
    throw ConfigError(msg.str());
  }
  terms_ = count / spec_.n_out;
  if (terms_ > std::numeric_limits<std::uint32_t>::max()) {
    throw ResourceError("field has too many monomials per output");
  }
  scale_ = std::sqrt(spec_.power / static_cast<double>(terms_));

  odd_terms_.assign(spec_.dim, {});
  std::vector<int> counts(spec_.dim);
  for (std::uint64_t flat = 0; flat < terms_; ++flat) {
    std::fill(counts.begin(), counts.end(), 0);
    std::uint64_t rest = flat;
    for (int level = 0; level < spec_.order; ++level) {
      ++counts[rest % spec_.dim];
      rest /= spec_.dim;
    }
    for (std::size_t j = 0; j < spec_.dim; ++j) {
      if (counts[j] % 2 == 1) odd_terms_[j].push_back(static_cast<std::uint32_t>(flat));
    }
  }
}

double GaussianField::monomial(std::uint64_t flat, std::span<const double> s) const {
  double prod = 1.0;
  for (int level = 0; level < spec_.order; ++level) {
    prod *= s[flat % spec_.dim];
    flat /= spec_.dim;
  }
  return prod;
}

void GaussianField::evaluate_into(std::span<const double> s, std::span<double> out) const {
  // Tensor power of s, row-major with the first index most significant.
  std::vector<double> mono{1.0};
  mono.reserve(terms_);
  for (int level = 0; level < spec_.order; ++level) {
    std::vector<double> next;
    next.reserve(mono.size() * spec_.dim);
    for (double m : mono) {
      for (double si : s) next.push_back(m * si);
    }
    mono.swap(next);
  }
  for (std::uint64_t n = 0; n < spec_.n_out; ++n) {
    const double* row = coeffs_.data() + n * terms_;
    double acc = 0.0;
    for (std::uint64_t t = 0; t < terms_; ++t) acc += row[t] * mono[t];
    out[n] = scale_ * acc;
  }
}

void GaussianField::apply_flip(std::span<const double> s, std::size_t flip_index,
                               std::span<double> out) const {
  const auto& terms = odd_terms_[flip_index];
  thread_local std::vector<double> mono;
  mono.resize(terms.size());
  for (std::size_t t = 0; t < terms.size(); ++t) mono[t] = monomial(terms[t], s);
  for (std::uint64_t n = 0; n < spec_.n_out; ++n) {
    const double* row = coeffs_.data() + n * terms_;
    double acc = 0.0;
    for (std::size_t t = 0; t < terms.size(); ++t) acc += row[terms[t]] * mono[t];
    out[n] -= 2.0 * scale_ * acc;
  }
}

std::vector<double> GaussianField::evaluate(std::span<const double> s) const {
  require_bipolar(s, spec_.dim);
  std::vector<double> out(spec_.n_out);
  evaluate_into(s, out);
  return out;
}

std::vector<double> GaussianField::evaluate_flipped(std::span<const double> s,
                                                    std::span<const double> base_output,
                                                    std::size_t flip_index) const {
  require_bipolar(s, spec_.dim);
  if (flip_index >= spec_.dim) throw InputError("flip index out of range");
  if (base_output.size() != spec_.n_out) throw InputError("base output has the wrong length");
  std::vector<double> out(base_output.begin(), base_output.end());
  apply_flip(s, flip_index, out);
  return out;
}

GaussianField sample_field(const FieldSpec& spec, std::uint64_t coefficient_budget) {
  spec.validate();
  const std::uint64_t count = spec.coefficient_count();
  if (count > coefficient_budget) {
    std::ostringstream msg;
    msg << "field needs " << count << " coefficients (N*K^lambda), budget is "
        << coefficient_budget;
    throw ResourceError(msg.str());
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal;
  std::vector<double> coeffs(count);
  for (double& c : coeffs) c = normal(rng);
  return GaussianField(spec, std::move(coeffs));
}

// --- binary dump ------------------------------------------------------------

namespace {

constexpr std::array<char, 4> kMagic{'S', 'F', 'G', 'F'};

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw InputError("truncated field file");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void GaussianField::save(std::ostream& os) const {
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, kFieldFormatVersion);
  put_le<std::uint64_t>(os, spec_.n_out);
  put_le<std::uint64_t>(os, spec_.dim);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(spec_.order));
  put_le<double>(os, spec_.power);
  put_le<std::uint64_t>(os, spec_.seed);
  put_le<std::uint64_t>(os, coeffs_.size());
  for (double c : coeffs_) put_le<double>(os, c);
  if (!os) throw InputError("failed to write field");
}

GaussianField GaussianField::load(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw InputError("not a field file (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(is);
  if (version != kFieldFormatVersion) {
    throw InputError("unsupported field format version " + std::to_string(version));
  }
  FieldSpec spec;
  spec.n_out = get_le<std::uint64_t>(is);
  spec.dim = get_le<std::uint64_t>(is);
  spec.order = static_cast<int>(get_le<std::uint32_t>(is));
  spec.power = get_le<double>(is);
  spec.seed = get_le<std::uint64_t>(is);
  spec.validate();
  const auto count = get_le<std::uint64_t>(is);
  if (count != spec.coefficient_count()) throw InputError("field file coefficient count mismatch");
  std::vector<double> coeffs(count);
  for (double& c : coeffs) c = get_le<double>(is);
  return GaussianField(spec, std::move(coeffs));
}

}  // namespace secfield
