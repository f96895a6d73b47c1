#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "secfield/codec.hpp"
#include "secfield/errors.hpp"
#include "secfield/random.hpp"
#include "support.hpp"

using namespace secfield;
using secfield::testing::brute_force_posterior_mean;
using secfield::testing::direct_eval;

namespace {

std::vector<double> random_bipolar(std::size_t dim, std::mt19937_64& rng) {
  std::vector<double> s(dim);
  for (double& v : s) v = (rng() & 1u) ? 1.0 : -1.0;
  return s;
}

CodecConfig small_config() {
  CodecConfig cfg;
  cfg.n = 16;
  cfg.k = 4;
  cfg.k_tilde_override = 2;
  cfg.order = 3;
  return cfg;
}

}  // namespace

TEST_CASE("config validation") {
  CodecConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.order = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.allow_ablation = true;
  CHECK_NOTHROW(cfg.validate());
  cfg = small_config();
  cfg.k = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.sigma_b_sq = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.k_tilde_override.reset();
  CHECK(cfg.k_tilde() == key_length(16, 1.0, 1.0));
  CHECK(cfg.total_dim() == 4 + cfg.k_tilde());
}

TEST_CASE("message bipolar mapping") {
  CHECK(message_to_bipolar(0, 3) == std::vector<double>{-1, -1, -1});
  CHECK(message_to_bipolar(7, 3) == std::vector<double>{1, 1, 1});
  CHECK(message_to_bipolar(1, 3) == std::vector<double>{1, -1, -1});
  for (std::uint64_t m = 0; m < 64; ++m) CHECK(bipolar_to_message(message_to_bipolar(m, 6)) == m);
  CHECK_THROWS_AS(message_to_bipolar(8, 3), InputError);
  CHECK_THROWS_AS(message_to_bipolar(0, 0), InputError);
  CHECK_THROWS_AS(bipolar_to_message(std::vector<double>{1, 0}), InputError);
}

TEST_CASE("bin layout") {
  bool nominal = false;
  CHECK(bin_boundaries(4, 2, &nominal) == std::vector<std::uint64_t>{0, 3, 6});
  CHECK(nominal);
  CHECK(bin_boundaries(7, 1) == std::vector<std::uint64_t>{0, 8});
  // B = 3 for (5, 3): nominal bins [0,3) [3,6) [6,8), last one truncated.
  CHECK(bin_boundaries(5, 3, &nominal) == std::vector<std::uint64_t>{0, 3, 6, 8});
  CHECK(nominal);
  // B = 2 for (2, 4): nominal layout would leave the last bin empty.
  const auto starts = bin_boundaries(2, 4, &nominal);
  CHECK_FALSE(nominal);
  REQUIRE(starts.size() == 5);
  CHECK(starts.front() == 0);
  CHECK(starts.back() == 6);
  for (std::size_t l = 0; l + 1 < starts.size(); ++l) {
    CHECK(starts[l + 1] > starts[l]);
    CHECK(starts[l + 1] - starts[l] <= bin_size(2, 4));
  }
}

TEST_CASE("build_binning invariants over many seeds and shapes") {
  for (std::uint64_t k : {1, 2, 4, 7, 12}) {
    for (std::uint64_t kt : {1, 2, 3, 5}) {
      for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const BinningPlan plan = build_binning(k, kt, seed);
        CHECK_NOTHROW(plan.check_invariants());
        CHECK(plan.bin_size == bin_size(k, kt));
        std::vector<double> v(k + kt);
        std::iota(v.begin(), v.end(), 0.0);
        CHECK(plan.invert(plan.apply(v)) == v);
        CHECK(plan.apply(plan.invert(v)) == v);
      }
    }
  }
  const BinningPlan a = build_binning(6, 3, 5), b = build_binning(6, 3, 5);
  CHECK(a.permutation == b.permutation);
}

TEST_CASE("K=4, K~=2 bins hold one key each") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const BinningPlan plan = build_binning(4, 2, seed);
    CHECK(plan.bin_size == 3);
    CHECK(plan.key_positions[0] < 3);
    CHECK(plan.key_positions[1] >= 3);
    CHECK(plan.key_positions[1] < 6);
  }
  const BinningPlan single = build_binning(5, 1, 3);
  CHECK(single.bin_starts == std::vector<std::uint64_t>{0, 6});
  CHECK(single.key_positions.size() == 1);
}

TEST_CASE("invariant checks catch broken plans") {
  // Both keys in the first bin.
  const BinningPlan bad = BinningPlan::from_permutation(4, 2, {0, 1, 2, 3, 4, 5});
  CHECK_FALSE(bad.one_key_per_bin());
  CHECK_THROWS_AS(bad.check_invariants(), ConfigError);
  CHECK_THROWS_AS(BinningPlan::from_permutation(4, 2, {0, 0, 2, 3, 4, 5}), InputError);
  CHECK_THROWS_AS(BinningPlan::from_permutation(4, 2, {0, 1, 2}), InputError);
  CHECK_THROWS_AS(build_binning(0, 2, 1), InputError);
}

TEST_CASE("binning distribution is uniform over the construction's support") {
  // K=2, K~=2: bins {0,1} and {2,3}; support is 2 (key 0) x 2 (key 1) x 2
  // (message order) = 8 permutations, each with probability 1/8.
  constexpr std::uint64_t kSeeds = 100000;
  std::map<std::vector<std::uint32_t>, std::uint64_t> counts;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    ++counts[build_binning(2, 2, derive_seed(seed, 0, StreamTag::kPermutation)).permutation];
  }
  // Oracle: enumerate every permutation and keep the admissible ones.
  std::vector<std::uint32_t> perm{0, 1, 2, 3};
  std::set<std::vector<std::uint32_t>> support;
  do {
    if (perm[0] < 2 && perm[1] >= 2) support.insert(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  REQUIRE(support.size() == 8);
  CHECK(counts.size() == 8);
  const double p = 1.0 / 8.0;
  const double se = std::sqrt(p * (1 - p) / kSeeds);
  for (const auto& [pi, c] : counts) {
    CHECK(support.count(pi) == 1);
    CHECK(std::abs(static_cast<double>(c) / kSeeds - p) <= 4.0 * se);
  }
}

TEST_CASE("encode") {
  const CodecConfig cfg = small_config();
  const auto field = sample_field(cfg.field_spec());
  const auto plan = build_binning(cfg.k, 2, cfg.perm_seed);
  const std::vector<double> key{1, -1};
  const EncodedFrame fr = encode(cfg, field, plan, 9, key);
  CHECK(fr.s == message_to_bipolar(9, 4));
  std::vector<double> stacked{1, -1};
  stacked.insert(stacked.end(), fr.s.begin(), fr.s.end());
  CHECK(fr.s_tilde == plan.apply(stacked));
  CHECK(fr.x == field.evaluate(fr.s_tilde));

  CodecConfig other = cfg;
  other.n = 8;
  CHECK_THROWS_AS(encode(other, field, plan, 9, key), ConfigError);
  CHECK_THROWS_AS(encode(cfg, field, plan, 9, std::vector<double>{1}), InputError);
  CHECK_THROWS_AS(encode(cfg, field, plan, 16, key), InputError);
}

TEST_CASE("encode with identity permutation on a linear field") {
  CodecConfig cfg = small_config();
  cfg.order = 1;
  cfg.allow_ablation = true;
  const auto field = sample_field(cfg.field_spec());
  const auto plan = BinningPlan::from_permutation(4, 2, {0, 1, 2, 3, 4, 5});
  const std::vector<double> key{-1, 1};
  const EncodedFrame fr = encode(cfg, field, plan, 5, key);
  const std::vector<double> stacked{-1, 1, 1, -1, 1, -1};
  CHECK(fr.s_tilde == stacked);
  const double scale = std::sqrt(1.0 / 6.0);
  for (std::size_t n = 0; n < cfg.n; ++n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 6; ++i) acc += field.coefficients()[n * 6 + i] * stacked[i];
    CHECK(fr.x[n] == doctest::Approx(scale * acc).epsilon(1e-14));
  }
}

TEST_CASE("codewords are distinct") {
  CodecConfig cfg = small_config();
  cfg.k = 6;
  const auto field = sample_field(cfg.field_spec());
  const auto plan = build_binning(cfg.k, 2, 1);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_bipolar(8, rng);
    auto b = random_bipolar(8, rng);
    if (a == b) b[0] = -b[0];
    CHECK(field.evaluate(a) != field.evaluate(b));
  }
  // Flipping one message bit always moves the codeword.
  const std::vector<double> key{1, 1};
  for (std::uint64_t m = 0; m < 64; ++m) {
    const auto base = encode(cfg, field, plan, m, key).x;
    for (std::uint64_t i = 0; i < cfg.k; ++i) {
      CHECK(encode(cfg, field, plan, m ^ (std::uint64_t{1} << i), key).x != base);
    }
  }
}

TEST_CASE("mmse_estimate matches the brute-force oracle") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  for (int order : {1, 2, 3}) {
    for (std::uint64_t dim : {1, 2, 3, 4}) {
      for (int t = 0; t < 5; ++t) {
        const auto field = sample_field({5, dim, order, 1.0, rng()});
        std::vector<double> y(5);
        for (double& v : y) v = normal(rng);
        const double sigma_sq = 0.05 + (rng() % 100) / 50.0;
        const auto got = mmse_estimate(field, y, sigma_sq);
        const auto ref = brute_force_posterior_mean(field, y, sigma_sq);
        for (std::size_t j = 0; j < dim; ++j) {
          CHECK(std::abs(got.r[j] - static_cast<double>(ref[j])) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("log partition matches direct summation") {
  const auto field = sample_field({4, 3, 3, 1.0, 6});
  const std::vector<double> y{0.3, -1.2, 0.8, 0.1};
  const double sigma_sq = 0.4;
  long double z = 0.0L;
  for (const auto& u : secfield::testing::all_bipolar(3)) {
    const auto v = direct_eval(field, u);
    long double sq = 0.0L;
    for (std::size_t n = 0; n < 4; ++n) sq += (y[n] - v[n]) * (y[n] - v[n]);
    z += std::exp(-sq / (2.0L * sigma_sq));
  }
  CHECK(std::abs(mmse_estimate(field, y, sigma_sq).log_partition - static_cast<double>(std::log(z))) <=
        1e-12);

  // Restricted sum over coordinate 1 only.
  const std::vector<double> base{1, -1, -1};
  const std::vector<std::uint32_t> free{1};
  long double zr = 0.0L;
  for (double s1 : {-1.0, 1.0}) {
    const std::vector<double> u{1, s1, -1};
    const auto v = direct_eval(field, u);
    long double sq = 0.0L;
    for (std::size_t n = 0; n < 4; ++n) sq += (y[n] - v[n]) * (y[n] - v[n]);
    zr += std::exp(-sq / (2.0L * sigma_sq));
  }
  CHECK(std::abs(log_partition_over(field, y, sigma_sq, base, free) -
                 static_cast<double>(std::log(zr))) <= 1e-12);
  // No free coordinates: a single term.
  const auto v = direct_eval(field, base);
  long double sq = 0.0L;
  for (std::size_t n = 0; n < 4; ++n) sq += (y[n] - v[n]) * (y[n] - v[n]);
  CHECK(std::abs(log_partition_over(field, y, sigma_sq, base, {}) +
                 static_cast<double>(sq / (2.0L * sigma_sq))) <= 1e-12);
}

TEST_CASE("mmse noiseless limit and boundedness") {
  std::mt19937_64 rng(77);
  const auto field = sample_field({16, 6, 3, 1.0, 8});
  for (int t = 0; t < 10; ++t) {
    const auto s = random_bipolar(6, rng);
    const auto y = field.evaluate(s);
    const auto res = mmse_estimate(field, y, 1e-12);
    CHECK(res.r == s);
    std::normal_distribution<double> normal;
    std::vector<double> noisy(y);
    for (double& v : noisy) v += 3.0 * normal(rng);
    for (double r : mmse_estimate(field, noisy, 2.0).r) {
      CHECK(r <= 1.0);
      CHECK(r >= -1.0);
    }
  }
}

TEST_CASE("odd-order posterior sign symmetry") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  const auto field = sample_field({6, 5, 3, 1.0, 3});
  std::vector<double> y(6), neg(6);
  for (std::size_t n = 0; n < 6; ++n) {
    y[n] = normal(rng);
    neg[n] = -y[n];
  }
  const auto a = mmse_estimate(field, y, 0.7);
  const auto b = mmse_estimate(field, neg, 0.7);
  for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(a.r[j] + b.r[j]) <= 1e-12);
  CHECK(std::abs(a.log_partition - b.log_partition) <= 1e-10);
}

TEST_CASE("enumeration order and splitting do not change the result") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal;
  const auto field = sample_field({12, 12, 3, 1.0, 14});
  std::vector<double> y(12);
  for (double& v : y) v = normal(rng);
  const auto fwd = mmse_estimate(field, y, 0.3);
  MmseOptions rev;
  rev.reverse = true;
  const auto bwd = mmse_estimate(field, y, 0.3, rev);
  CHECK(std::abs(fwd.log_partition - bwd.log_partition) <= 1e-10 * std::abs(fwd.log_partition));
  for (std::size_t j = 0; j < 12; ++j) CHECK(std::abs(fwd.r[j] - bwd.r[j]) <= 1e-10);

  for (unsigned chunks : {2u, 3u, 7u}) {
    MmseOptions split;
    split.chunks = chunks;
    split.threads = 3;
    const auto s = mmse_estimate(field, y, 0.3, split);
    CHECK(std::abs(fwd.log_partition - s.log_partition) <= 1e-10 * std::abs(fwd.log_partition));
    for (std::size_t j = 0; j < 12; ++j) CHECK(std::abs(fwd.r[j] - s.r[j]) <= 1e-10);
    // Same split with one thread: bit-identical.
    MmseOptions serial = split;
    serial.threads = 1;
    const auto t = mmse_estimate(field, y, 0.3, serial);
    CHECK(t.r == s.r);
    CHECK(t.log_partition == s.log_partition);
  }
}

TEST_CASE("mmse errors") {
  const auto field = sample_field({4, 3, 3, 1.0, 6});
  const std::vector<double> y(4, 0.0);
  CHECK_THROWS_AS(mmse_estimate(field, y, 0.0), InputError);
  CHECK_THROWS_AS(mmse_estimate(field, y, -1.0), InputError);
  CHECK_THROWS_AS(mmse_estimate(field, std::vector<double>(3, 0.0), 1.0), InputError);
  MmseOptions tight;
  tight.max_dim = 2;
  CHECK_THROWS_AS(mmse_estimate(field, y, 1.0, tight), ResourceError);
}

TEST_CASE("decode") {
  const CodecConfig cfg = small_config();
  const auto field = sample_field(cfg.field_spec());
  const auto plan = build_binning(cfg.k, 2, 4);
  const std::vector<double> key{-1, 1};
  for (std::uint64_t m = 0; m < 16; ++m) {
    const EncodedFrame fr = encode(cfg, field, plan, m, key);
    CHECK(decode(cfg, plan, fr.s_tilde).m == m);
    std::vector<double> neg(fr.s_tilde);
    for (double& v : neg) v = -v;
    CHECK(decode(cfg, plan, neg).m == (m ^ 15u));
  }
  // sgn(0) = +1
  CHECK(decode(cfg, plan, std::vector<double>(6, 0.0)).m == 15);
  CHECK_THROWS_AS(decode(cfg, plan, std::vector<double>(5, 0.0)), InputError);
}

TEST_CASE("noiseless end-to-end recovery") {
  const CodecConfig cfg = small_config();
  std::mt19937_64 rng(31);
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto field = sample_field(cfg.field_spec(rng()));
    const auto plan = build_binning(cfg.k, 2, rng());
    const std::uint64_t m = rng() % 16;
    const auto key = random_bipolar(2, rng);
    const EncodedFrame fr = encode(cfg, field, plan, m, key);
    const auto est = mmse_estimate(field, fr.x, 1e-12);
    CHECK(decode(cfg, plan, est.r).m == m);
  }
}

TEST_CASE("frame record round trip") {
  CodecConfig cfg = small_config();
  cfg.field_seed = 11;
  cfg.noise_seed = 99;
  const auto field = sample_field(cfg.field_spec());
  const auto plan = build_binning(cfg.k, 2, cfg.perm_seed);
  const EncodedFrame fr = encode(cfg, field, plan, 6, std::vector<double>{1, -1});
  std::stringstream buf;
  write_frame(buf, cfg, fr);
  const std::string text = buf.str();
  CHECK(text.rfind("frame v1\nseeds field=11 perm=2 key=3 noise=99\nm 6\nk 10\n", 0) == 0);
  const FrameRecord rec = read_frame(buf);
  CHECK(rec.field_seed == 11);
  CHECK(rec.noise_seed == 99);
  CHECK(rec.frame.m == 6);
  CHECK(rec.frame.key == fr.key);
  CHECK(rec.frame.s == fr.s);
  CHECK(rec.frame.s_tilde == fr.s_tilde);
  CHECK(rec.frame.x == fr.x);

  std::stringstream bad("frame v2\n");
  CHECK_THROWS_AS(read_frame(bad), InputError);
  std::stringstream trunc(text.substr(0, text.find("x ")));
  CHECK_THROWS_AS(read_frame(trunc), InputError);
}
