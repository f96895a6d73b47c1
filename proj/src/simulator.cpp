#include "secfield/simulator.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <thread>

#include "secfield/errors.hpp"
#include "secfield/numerics.hpp"

namespace secfield {

namespace {

std::vector<double> random_bipolar(std::uint64_t len, std::mt19937_64& rng) {
  std::vector<double> out(len);
  for (double& v : out) v = (rng() >> 63) != 0 ? 1.0 : -1.0;
  return out;
}

std::uint64_t random_message(std::uint64_t k, std::mt19937_64& rng) {
  return k >= 64 ? rng() : rng() >> (64 - k);
}

}  // namespace

std::vector<double> transmit(std::span<const double> x, double sigma_sq, std::mt19937_64& rng) {
  if (!(sigma_sq >= 0.0) || !std::isfinite(sigma_sq)) {
    throw InputError("noise variance must be non-negative");
  }
  std::vector<double> y(x.begin(), x.end());
  if (sigma_sq == 0.0) return y;
  std::normal_distribution<double> noise(0.0, std::sqrt(sigma_sq));
  for (double& v : y) v += noise(rng);
  return y;
}

TrialRecord run_trial(const CodecConfig& cfg, const GaussianField& field, const BinningPlan& plan,
                      std::uint64_t trial_id, const MmseOptions& mmse) {
  std::mt19937_64 msg_rng(derive_seed(cfg.noise_seed, trial_id, StreamTag::kMessage));
  std::mt19937_64 key_rng(derive_seed(cfg.key_seed, trial_id, StreamTag::kKey));
  std::mt19937_64 noise_rng(derive_seed(cfg.noise_seed, trial_id, StreamTag::kBobNoise));

  const std::uint64_t m = random_message(cfg.k, msg_rng);
  const std::vector<double> key = random_bipolar(cfg.k_tilde(), key_rng);
  const EncodedFrame frame = encode(cfg, field, plan, m, key);
  const std::vector<double> y = transmit(frame.x, cfg.sigma_b_sq, noise_rng);
  const MmseResult post = mmse_estimate(field, y, cfg.sigma_b_sq, mmse);
  const DecodedMessage dec = decode(cfg, plan, post.r);

  TrialRecord rec;
  rec.trial_id = trial_id;
  rec.message = m;
  rec.decoded = dec.m;
  rec.bit_errors = static_cast<std::uint64_t>(std::popcount(m ^ dec.m));
  const auto total = static_cast<double>(frame.s_tilde.size());
  std::int64_t flips = 0;
  std::int64_t sign_agreement = 0;
  double inner = 0.0;
  for (std::size_t i = 0; i < frame.s_tilde.size(); ++i) {
    const double sign = post.r[i] >= 0.0 ? 1.0 : -1.0;
    if (sign != frame.s_tilde[i]) ++flips;
    sign_agreement += static_cast<std::int64_t>(sign * frame.s_tilde[i]);
    inner += frame.s_tilde[i] * post.r[i];
  }
  rec.flip_fraction = static_cast<double>(flips) / total;
  rec.overlap = inner / total;
  rec.overlap_sign = static_cast<double>(sign_agreement) / total;
  rec.bound_ok = rec.flip_fraction <= 1.0 - rec.overlap;
  return rec;
}

LeakageEstimate estimate_leakage(const CodecConfig& cfg, const GaussianField& field,
                                 const BinningPlan& plan, std::uint64_t n_samples,
                                 std::uint64_t stream_index, const MmseOptions& mmse) {
  cfg.validate();
  if (n_samples < 1) throw InputError("leakage estimation needs at least one sample");
  const std::uint64_t total = cfg.total_dim();
  if (total > mmse.max_dim) {
    throw ResourceError("leakage estimation needs exact posteriors over 2^" +
                        std::to_string(total) + " inputs, above the enumeration budget 2^" +
                        std::to_string(mmse.max_dim));
  }
  std::mt19937_64 rng(derive_seed(cfg.noise_seed, stream_index, StreamTag::kLeakage));
  std::vector<std::uint32_t> all(total);
  std::iota(all.begin(), all.end(), 0u);
  const double ln2 = std::numbers::ln2;
  const double inv_n = 1.0 / static_cast<double>(cfg.n);
  const double inv_two_var = 0.5 / cfg.sigma_e_sq;

  std::vector<double> msg(n_samples), cw(n_samples), key(n_samples), resid(n_samples);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const std::uint64_t m = random_message(cfg.k, rng);
    const std::vector<double> k = random_bipolar(cfg.k_tilde(), rng);
    const EncodedFrame frame = encode(cfg, field, plan, m, k);
    const std::vector<double> y = transmit(frame.x, cfg.sigma_e_sq, rng);
    double sq = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) sq += (y[j] - frame.x[j]) * (y[j] - frame.x[j]);
    const double log_true = -sq * inv_two_var;
    const double log_all = log_partition_over(field, y, cfg.sigma_e_sq, frame.s_tilde, all, mmse);
    const double log_keys =
        log_partition_over(field, y, cfg.sigma_e_sq, frame.s_tilde, plan.key_positions, mmse);
    const double log_p_y = log_all - static_cast<double>(total) * ln2;
    const double log_p_y_given_s = log_keys - static_cast<double>(cfg.k_tilde()) * ln2;
    msg[i] = (log_p_y_given_s - log_p_y) * inv_n;
    cw[i] = (log_true - log_p_y) * inv_n;
    key[i] = (log_true - log_p_y_given_s) * inv_n;
    resid[i] = msg[i] - (cw[i] - key[i]);
  }
  LeakageEstimate out;
  out.n_samples = n_samples;
  std::tie(out.message, out.message_se) = mean_and_se(msg);
  std::tie(out.codeword, out.codeword_se) = mean_and_se(cw);
  std::tie(out.key, out.key_se) = mean_and_se(key);
  std::tie(out.chain_residual, out.chain_se) = mean_and_se(resid);
  return out;
}

GaussianField trial_field(const CodecConfig& cfg, std::uint64_t trial_id, bool freeze,
                          std::uint64_t coefficient_budget) {
  const std::uint64_t seed =
      freeze ? cfg.field_seed : derive_seed(cfg.field_seed, trial_id, StreamTag::kField);
  return sample_field(cfg.field_spec(seed), coefficient_budget);
}

BinningPlan trial_plan(const CodecConfig& cfg, std::uint64_t trial_id, bool freeze) {
  const std::uint64_t seed =
      freeze ? cfg.perm_seed : derive_seed(cfg.perm_seed, trial_id, StreamTag::kPermutation);
  return build_binning(cfg.k, cfg.k_tilde(), seed);
}

SimReport run_experiment(const CodecConfig& cfg, std::uint64_t n_trials,
                         const ExperimentOptions& options) {
  cfg.validate();
  if (n_trials < 1) throw InputError("an experiment needs at least one trial");
  const auto start = std::chrono::steady_clock::now();
  MmseOptions mmse;
  mmse.max_dim = options.enumeration_budget;
  if (cfg.total_dim() > mmse.max_dim) {
    throw ResourceError("K + K~ = " + std::to_string(cfg.total_dim()) +
                        " exceeds the enumeration budget of " + std::to_string(mmse.max_dim) +
                        "; lower N or K");
  }

  SimReport report;
  report.config = cfg;
  report.options = options;
  report.n_trials = n_trials;
  report.k_tilde = cfg.k_tilde();
  report.trials.resize(n_trials);

  // Frozen artifacts are shared; otherwise each trial draws its own.
  std::optional<GaussianField> frozen_field;
  std::optional<BinningPlan> frozen_plan;
  if (options.freeze_field) frozen_field = trial_field(cfg, 0, true, options.coefficient_budget);
  if (options.freeze_plan) frozen_plan = trial_plan(cfg, 0, true);

  auto work = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t t = begin; t < end; ++t) {
      const GaussianField field =
          frozen_field ? *frozen_field : trial_field(cfg, t, false, options.coefficient_budget);
      const BinningPlan plan = frozen_plan ? *frozen_plan : trial_plan(cfg, t, false);
      report.trials[t] = run_trial(cfg, field, plan, t, mmse);
    }
  };
  const unsigned threads =
      std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(n_trials)));
  if (threads == 1) {
    work(0, n_trials);
  } else {
    std::vector<std::jthread> pool;
    const std::uint64_t chunk = (n_trials + threads - 1) / threads;
    for (std::uint64_t b = 0; b < n_trials; b += chunk) {
      pool.emplace_back(work, b, std::min(n_trials, b + chunk));
    }
  }

  std::vector<double> f(n_trials), ov(n_trials), ber(n_trials);
  std::uint64_t msg_errors = 0;
  std::uint64_t nonzero_f = 0;
  for (std::uint64_t t = 0; t < n_trials; ++t) {
    const TrialRecord& r = report.trials[t];
    f[t] = r.flip_fraction;
    ov[t] = r.overlap;
    ber[t] = static_cast<double>(r.bit_errors) / static_cast<double>(cfg.k);
    msg_errors += r.message != r.decoded ? 1 : 0;
    nonzero_f += r.flip_fraction > 0.0 ? 1 : 0;
    report.all_bounds_ok = report.all_bounds_ok && r.bound_ok;
  }
  const auto n = static_cast<double>(n_trials);
  report.message_error_rate = static_cast<double>(msg_errors) / n;
  report.nonzero_flip_rate = static_cast<double>(nonzero_f) / n;
  std::tie(report.mean_f, report.mean_f_se) = mean_and_se(f);
  std::tie(report.mean_overlap, report.mean_overlap_se) = mean_and_se(ov);
  report.mean_bit_error_rate = mean_and_se(ber).first;

  if (options.leakage_samples > 0) {
    const GaussianField field =
        frozen_field ? *frozen_field : trial_field(cfg, 0, false, options.coefficient_budget);
    const BinningPlan plan = frozen_plan ? *frozen_plan : trial_plan(cfg, 0, false);
    report.leakage = estimate_leakage(cfg, field, plan, options.leakage_samples, 0, mmse);
    report.has_leakage = true;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace secfield
