#include "secfield/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "secfield/errors.hpp"

namespace secfield {

// --- configuration ----------------------------------------------------------

void CodecConfig::validate() const {
  if (n < 1 || k < 1) throw ConfigError("codec needs n >= 1 and k >= 1");
  if (k > 63) throw ConfigError("message length above 63 bits is not supported");
  if (order < 1) throw ConfigError("field order must be >= 1");
  if (order < 3 && !allow_ablation) {
    throw ConfigError("the secure scheme needs lambda >= 3 (set the ablation flag for 1 or 2)");
  }
  wiretap().validate();
  if (k_tilde_override && *k_tilde_override < 1) throw ConfigError("k_tilde must be >= 1");
}

std::uint64_t CodecConfig::k_tilde() const {
  if (k_tilde_override) return *k_tilde_override;
  return key_length(n, power, sigma_e_sq);
}

FieldSpec CodecConfig::field_spec(std::uint64_t seed) const {
  return FieldSpec{n, total_dim(), order, power, seed};
}

// --- binning ----------------------------------------------------------------

std::vector<std::uint64_t> bin_boundaries(std::uint64_t k, std::uint64_t k_tilde,
                                          bool* nominal_layout) {
  const std::uint64_t b = bin_size(k, k_tilde);
  const std::uint64_t total = k + k_tilde;
  const bool nominal = (k_tilde - 1) * b < total;
  std::vector<std::uint64_t> starts(k_tilde + 1);
  for (std::uint64_t l = 0; l < k_tilde; ++l) {
    starts[l] = nominal ? l * b : (l * total) / k_tilde;
  }
  starts[k_tilde] = total;
  if (nominal_layout != nullptr) *nominal_layout = nominal;
  return starts;
}

std::vector<double> BinningPlan::apply(std::span<const double> v) const {
  if (v.size() != permutation.size()) throw InputError("vector length does not match the plan");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[permutation[i]] = v[i];
  return out;
}

std::vector<double> BinningPlan::invert(std::span<const double> v) const {
  if (v.size() != permutation.size()) throw InputError("vector length does not match the plan");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[permutation[i]];
  return out;
}

bool BinningPlan::one_key_per_bin() const {
  if (bin_starts.size() != k_tilde + 1) return false;
  std::vector<int> per_bin(k_tilde, 0);
  for (auto pos : key_positions) {
    const auto it = std::upper_bound(bin_starts.begin(), bin_starts.end(), pos);
    ++per_bin[static_cast<std::size_t>(it - bin_starts.begin()) - 1];
  }
  return std::all_of(per_bin.begin(), per_bin.end(), [](int c) { return c == 1; });
}

void BinningPlan::check_invariants() const {
  if (permutation.size() != total()) throw ConfigError("permutation has the wrong length");
  std::vector<bool> seen(total(), false);
  for (auto p : permutation) {
    if (p >= total() || seen[p]) throw ConfigError("permutation is not a bijection");
    seen[p] = true;
  }
  if (key_positions.size() != k_tilde ||
      !std::equal(key_positions.begin(), key_positions.end(), permutation.begin())) {
    throw ConfigError("key positions do not match the permutation");
  }
  if (!one_key_per_bin()) throw ConfigError("a bin does not hold exactly one key symbol");
}

BinningPlan BinningPlan::from_permutation(std::uint64_t k, std::uint64_t k_tilde,
                                          std::vector<std::uint32_t> permutation) {
  BinningPlan plan;
  plan.k = k;
  plan.k_tilde = k_tilde;
  plan.bin_size = secfield::bin_size(k, k_tilde);
  plan.bin_starts = bin_boundaries(k, k_tilde, &plan.nominal_layout);
  plan.permutation = std::move(permutation);
  if (plan.permutation.size() != k + k_tilde) throw InputError("permutation has the wrong length");
  std::vector<std::uint32_t> sorted = plan.permutation;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != i) throw InputError("not a permutation");
  }
  plan.key_positions.assign(plan.permutation.begin(),
                            plan.permutation.begin() + static_cast<std::ptrdiff_t>(k_tilde));
  return plan;
}

BinningPlan build_binning(std::uint64_t k, std::uint64_t k_tilde, std::uint64_t perm_seed) {
  if (k < 1 || k_tilde < 1) throw InputError("binning needs k, k_tilde >= 1");
  if (k + k_tilde > std::numeric_limits<std::uint32_t>::max()) {
    throw ResourceError("binning dimension too large");
  }
  BinningPlan plan;
  plan.k = k;
  plan.k_tilde = k_tilde;
  plan.bin_size = secfield::bin_size(k, k_tilde);
  plan.bin_starts = bin_boundaries(k, k_tilde, &plan.nominal_layout);

  std::mt19937_64 rng(perm_seed);
  const std::uint64_t total = k + k_tilde;
  std::vector<bool> taken(total, false);
  plan.permutation.resize(total);
  for (std::uint64_t l = 0; l < k_tilde; ++l) {
    std::uniform_int_distribution<std::uint64_t> pick(plan.bin_starts[l],
                                                      plan.bin_starts[l + 1] - 1);
    const auto pos = static_cast<std::uint32_t>(pick(rng));
    plan.permutation[l] = pos;
    taken[pos] = true;
  }
  std::vector<std::uint32_t> rest;
  rest.reserve(k);
  for (std::uint32_t p = 0; p < total; ++p) {
    if (!taken[p]) rest.push_back(p);
  }
  std::shuffle(rest.begin(), rest.end(), rng);
  std::copy(rest.begin(), rest.end(), plan.permutation.begin() + static_cast<std::ptrdiff_t>(k_tilde));
  plan.key_positions.assign(plan.permutation.begin(),
                            plan.permutation.begin() + static_cast<std::ptrdiff_t>(k_tilde));
  plan.check_invariants();
  return plan;
}

// --- messages and encoding --------------------------------------------------

std::vector<double> message_to_bipolar(std::uint64_t m, std::uint64_t k) {
  if (k < 1 || k > 63) throw InputError("message length must be in [1, 63]");
  if (m >> k != 0) throw InputError("message index out of range");
  std::vector<double> s(k);
  for (std::uint64_t i = 0; i < k; ++i) s[i] = ((m >> i) & 1u) != 0 ? 1.0 : -1.0;
  return s;
}

std::uint64_t bipolar_to_message(std::span<const double> s) {
  if (s.empty() || s.size() > 63) throw InputError("message length must be in [1, 63]");
  require_bipolar(s, s.size());
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] > 0.0) m |= std::uint64_t{1} << i;
  }
  return m;
}

EncodedFrame encode(const CodecConfig& cfg, const GaussianField& field, const BinningPlan& plan,
                    std::uint64_t m, std::span<const double> key) {
  cfg.validate();
  const FieldSpec& fs = field.spec();
  if (fs.n_out != cfg.n || fs.dim != cfg.total_dim() || fs.order != cfg.order ||
      fs.power != cfg.power) {
    throw ConfigError("field spec does not match the codec configuration");
  }
  if (plan.k != cfg.k || plan.k_tilde != cfg.k_tilde()) {
    throw ConfigError("binning plan does not match the codec configuration");
  }
  require_bipolar(key, cfg.k_tilde());
  EncodedFrame frame;
  frame.m = m;
  frame.s = message_to_bipolar(m, cfg.k);
  frame.key.assign(key.begin(), key.end());
  std::vector<double> stacked = frame.key;
  stacked.insert(stacked.end(), frame.s.begin(), frame.s.end());
  frame.s_tilde = plan.apply(stacked);
  frame.x = field.evaluate(frame.s_tilde);
  return frame;
}

// --- exact posterior enumeration --------------------------------------------

namespace {

// Full re-evaluation interval that bounds rounding drift of the flip updates.
constexpr std::uint64_t kResyncInterval = 1024;

// Streaming log-domain accumulator: every weight is stored relative to the
// running maximum exponent.
struct LogAccumulator {
  double max_log = -std::numeric_limits<double>::infinity();
  double z = 0.0;
  std::vector<double> plus;  // Σ weights with u_j = +1, per coordinate (optional)

  void add(double log_w, std::span<const double> u) {
    if (log_w > max_log) {
      const double rescale = std::isfinite(max_log) ? std::exp(max_log - log_w) : 0.0;
      z *= rescale;
      for (double& p : plus) p *= rescale;
      max_log = log_w;
    }
    const double w = std::exp(log_w - max_log);
    z += w;
    for (std::size_t j = 0; j < plus.size(); ++j) {
      if (u[j] > 0.0) plus[j] += w;
    }
  }

  void merge(const LogAccumulator& other) {
    if (!(other.z > 0.0)) return;
    if (!(z > 0.0)) {
      *this = other;
      return;
    }
    const double mx = std::max(max_log, other.max_log);
    const double a = std::exp(max_log - mx);
    const double b = std::exp(other.max_log - mx);
    z = z * a + other.z * b;
    for (std::size_t j = 0; j < plus.size(); ++j) plus[j] = plus[j] * a + other.plus[j] * b;
    max_log = mx;
  }

  double log_z() const { return max_log + std::log(z); }
};

double log_weight(std::span<const double> y, std::span<const double> v, double inv_two_var) {
  double sq = 0.0;
  for (std::size_t n = 0; n < y.size(); ++n) {
    const double d = y[n] - v[n];
    sq += d * d;
  }
  return -sq * inv_two_var;
}

// Enumerates Gray indices t ∈ [begin, end) (descending when reverse): free
// coordinate b is +1 iff bit b of gray(t) is set.
void gray_range(const GaussianField& field, std::span<const double> y, double inv_two_var,
                std::span<const double> base, std::span<const std::uint32_t> free,
                std::uint64_t begin, std::uint64_t end, bool reverse, LogAccumulator& acc) {
  if (begin >= end) return;
  std::vector<double> u(base.begin(), base.end());
  std::vector<double> v(field.spec().n_out);
  const auto set_state = [&](std::uint64_t t) {
    const std::uint64_t g = t ^ (t >> 1);
    for (std::size_t b = 0; b < free.size(); ++b) u[free[b]] = ((g >> b) & 1u) != 0 ? 1.0 : -1.0;
    field.evaluate_into(u, v);
  };
  std::uint64_t t = reverse ? end - 1 : begin;
  set_state(t);
  acc.add(log_weight(y, v, inv_two_var), u);
  for (std::uint64_t step = 1; step < end - begin; ++step) {
    // gray(t) and gray(t−1) differ in bit ctz(t).
    const std::uint64_t next = reverse ? t - 1 : t + 1;
    const auto bit = static_cast<std::size_t>(std::countr_zero(reverse ? t : next));
    t = next;
    if (step % kResyncInterval == 0) {
      set_state(t);
    } else {
      const std::uint32_t coord = free[bit];
      field.apply_flip(u, coord, v);
      u[coord] = -u[coord];
    }
    acc.add(log_weight(y, v, inv_two_var), u);
  }
}

LogAccumulator enumerate(const GaussianField& field, std::span<const double> y, double sigma_sq,
                         std::span<const double> base, std::span<const std::uint32_t> free,
                         const MmseOptions& options, bool track_means) {
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
    throw InputError("noise variance must be positive");
  }
  if (y.size() != field.spec().n_out) throw InputError("observation has the wrong length");
  if (free.size() > options.max_dim || free.size() > 62) {
    std::ostringstream msg;
    msg << "exact enumeration over 2^" << free.size() << " inputs exceeds the budget of 2^"
        << options.max_dim;
    throw ResourceError(msg.str());
  }
  for (auto c : free) {
    if (c >= field.spec().dim) throw InputError("free coordinate out of range");
  }
  const double inv_two_var = 0.5 / sigma_sq;
  const std::uint64_t total = std::uint64_t{1} << free.size();
  const std::uint64_t chunks = std::clamp<std::uint64_t>(options.chunks, 1, total);
  std::vector<LogAccumulator> parts(chunks);
  for (auto& p : parts) {
    if (track_means) p.plus.assign(field.spec().dim, 0.0);
  }
  auto run = [&](std::uint64_t c) {
    const std::uint64_t lo = total * c / chunks;
    const std::uint64_t hi = total * (c + 1) / chunks;
    gray_range(field, y, inv_two_var, base, free, lo, hi, options.reverse, parts[c]);
  };
  if (options.threads <= 1 || chunks == 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) run(c);
  } else {
    std::vector<std::jthread> pool;
    const unsigned workers = std::min<unsigned>(options.threads, static_cast<unsigned>(chunks));
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t c = w; c < chunks; c += workers) run(c);
      });
    }
  }
  // Fixed merge order keeps the result independent of thread scheduling.
  LogAccumulator out = parts[0];
  for (std::uint64_t c = 1; c < chunks; ++c) out.merge(parts[c]);
  return out;
}

}  // namespace

MmseResult mmse_estimate(const GaussianField& field, std::span<const double> y, double sigma_sq,
                         const MmseOptions& options) {
  const std::uint64_t dim = field.spec().dim;
  std::vector<std::uint32_t> free(dim);
  std::iota(free.begin(), free.end(), 0u);
  const std::vector<double> base(dim, -1.0);
  const LogAccumulator acc = enumerate(field, y, sigma_sq, base, free, options, true);
  MmseResult out;
  out.log_partition = acc.log_z();
  out.r.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    out.r[j] = std::clamp((2.0 * acc.plus[j] - acc.z) / acc.z, -1.0, 1.0);
  }
  return out;
}

double log_partition_over(const GaussianField& field, std::span<const double> y, double sigma_sq,
                          std::span<const double> base, std::span<const std::uint32_t> free_coords,
                          const MmseOptions& options) {
  require_bipolar(base, field.spec().dim);
  return enumerate(field, y, sigma_sq, base, free_coords, options, false).log_z();
}

DecodedMessage decode(const CodecConfig& cfg, const BinningPlan& plan,
                      std::span<const double> r_tilde) {
  if (r_tilde.size() != plan.total() || plan.k != cfg.k) {
    throw InputError("posterior mean does not match the binning plan");
  }
  const std::vector<double> r = plan.invert(r_tilde);
  DecodedMessage out;
  out.s_hat.resize(cfg.k);
  for (std::uint64_t i = 0; i < cfg.k; ++i) {
    out.s_hat[i] = r[plan.k_tilde + i] >= 0.0 ? 1.0 : -1.0;
  }
  out.m = bipolar_to_message(out.s_hat);
  return out;
}

// --- frame records ----------------------------------------------------------

namespace {

std::string to_bits(std::span<const double> v) {
  std::string out;
  out.reserve(v.size());
  for (double x : v) out.push_back(x > 0.0 ? '1' : '0');
  return out;
}

std::vector<double> from_bits(const std::string& bits) {
  std::vector<double> out;
  out.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') throw InputError("frame bit strings may only contain 0 and 1");
    out.push_back(c == '1' ? 1.0 : -1.0);
  }
  return out;
}

std::string expect_line(std::istream& is, const std::string& tag) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("truncated frame record, expected '" + tag + "'");
  if (line.rfind(tag + " ", 0) != 0 && line != tag) {
    throw InputError("frame record: expected '" + tag + "', got '" + line + "'");
  }
  return line.size() > tag.size() ? line.substr(tag.size() + 1) : std::string{};
}

}  // namespace

void write_frame(std::ostream& os, const CodecConfig& cfg, const EncodedFrame& frame) {
  os << "frame v1\n";
  os << "seeds field=" << cfg.field_seed << " perm=" << cfg.perm_seed << " key=" << cfg.key_seed
     << " noise=" << cfg.noise_seed << '\n';
  os << "m " << frame.m << '\n';
  os << "k " << to_bits(frame.key) << '\n';
  os << "s_tilde " << to_bits(frame.s_tilde) << '\n';
  std::ostringstream xs;
  xs.precision(17);
  for (std::size_t i = 0; i < frame.x.size(); ++i) xs << (i ? " " : "") << frame.x[i];
  os << "x " << xs.str() << '\n';
  os << "end\n";
}

FrameRecord read_frame(std::istream& is) {
  FrameRecord rec;
  if (expect_line(is, "frame") != "v1") throw InputError("unsupported frame record version");
  {
    std::istringstream seeds(expect_line(is, "seeds"));
    std::string item;
    while (seeds >> item) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw InputError("malformed seed entry '" + item + "'");
      const std::string key = item.substr(0, eq);
      const std::uint64_t value = std::stoull(item.substr(eq + 1));
      if (key == "field") rec.field_seed = value;
      else if (key == "perm") rec.perm_seed = value;
      else if (key == "key") rec.key_seed = value;
      else if (key == "noise") rec.noise_seed = value;
      else throw InputError("unknown seed '" + key + "'");
    }
  }
  rec.frame.m = std::stoull(expect_line(is, "m"));
  rec.frame.key = from_bits(expect_line(is, "k"));
  rec.frame.s_tilde = from_bits(expect_line(is, "s_tilde"));
  {
    std::istringstream xs(expect_line(is, "x"));
    double v;
    while (xs >> v) rec.frame.x.push_back(v);
  }
  expect_line(is, "end");
  if (rec.frame.s_tilde.size() > rec.frame.key.size()) {
    rec.frame.s = message_to_bipolar(rec.frame.m, rec.frame.s_tilde.size() - rec.frame.key.size());
  }
  return rec;
}

}  // namespace secfield
