#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "secfield/channel_math.hpp"
#include "secfield/errors.hpp"
#include "secfield/field_check.hpp"
#include "secfield/replica.hpp"
#include "secfield/report.hpp"
#include "secfield/simulator.hpp"

namespace {

using namespace secfield;

constexpr int kExitUsage = 2;
constexpr int kExitResource = 3;
constexpr int kExitNumerical = 4;

struct Triple {
  double lo, hi, step;
};

std::vector<double> split_numbers(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InputError("not a number: '" + item + "'");
    }
    if (used != item.size()) throw InputError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

Triple parse_grid(const std::string& text) {
  const auto v = split_numbers(text, ':');
  if (v.size() != 3) throw InputError("rate grid must be lo:hi:step, got '" + text + "'");
  if (!(v[2] > 0.0)) throw InputError("rate grid step must be positive");
  if (!(v[0] <= v[1])) throw InputError("rate grid is inverted: lo > hi in '" + text + "'");
  if (!(v[0] > 0.0)) throw InputError("rates must be positive");
  return {v[0], v[1], v[2]};
}

unsigned env_threads() {
  const char* env = std::getenv("SECFIELD_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw InputError("SECFIELD_THREADS must be a positive integer");
  return static_cast<unsigned>(v);
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Science {
  int lambda = 0;
  double power = 0.0;
  double sigma_sq = 0.0;
};

struct CodecFlags {
  std::uint64_t n = 0, k = 0;
  std::optional<std::uint64_t> k_tilde;
  bool at_secrecy_capacity = false;
  int lambda = 0;
  bool ablation = false;
  double power = 0.0, sigma_b_sq = 0.0, sigma_e_sq = 0.0;
  std::uint64_t field_seed = 1, perm_seed = 2, key_seed = 3, noise_seed = 4;
  std::uint64_t enumeration_budget = kDefaultEnumerationBudget;
  std::uint64_t coefficient_budget = kDefaultCoefficientBudget;
};

void add_codec_flags(CLI::App* sub, CodecFlags& f) {
  sub->add_option("--n", f.n, "channel uses N")->required();
  auto* k = sub->add_option("--k", f.k, "message bits K");
  k->excludes(sub->add_flag("--at-secrecy-capacity", f.at_secrecy_capacity,
                            "derive K = floor(N C_S / log 2)"));
  sub->add_option("--k-tilde", f.k_tilde, "override the key length");
  sub->add_option("--lambda", f.lambda, "field order")->required();
  sub->add_flag("--ablation", f.ablation, "permit lambda 1 or 2");
  sub->add_option("--power", f.power, "transmit power P")->required();
  sub->add_option("--sigma-b-sq", f.sigma_b_sq, "receiver noise variance")->required();
  sub->add_option("--sigma-e-sq", f.sigma_e_sq, "eavesdropper noise variance")->required();
  sub->add_option("--field-seed", f.field_seed);
  sub->add_option("--perm-seed", f.perm_seed);
  sub->add_option("--key-seed", f.key_seed);
  sub->add_option("--noise-seed", f.noise_seed);
  sub->add_option("--enumeration-budget", f.enumeration_budget, "max K + K~ for exact sums");
  sub->add_option("--coefficient-budget", f.coefficient_budget, "max stored field coefficients");
}

CodecConfig to_codec(const CodecFlags& f, std::ostream& notes) {
  CodecConfig cfg;
  cfg.n = f.n;
  cfg.order = f.lambda;
  cfg.allow_ablation = f.ablation;
  cfg.power = f.power;
  cfg.sigma_b_sq = f.sigma_b_sq;
  cfg.sigma_e_sq = f.sigma_e_sq;
  cfg.k_tilde_override = f.k_tilde;
  cfg.field_seed = f.field_seed;
  cfg.perm_seed = f.perm_seed;
  cfg.key_seed = f.key_seed;
  cfg.noise_seed = f.noise_seed;
  if (f.at_secrecy_capacity) {
    const WiretapParams w = cfg.wiretap();
    w.validate();
    const double cs = secrecy_capacity(w);
    cfg.k = message_length_at_secrecy_capacity(f.n, w);
    notes << "# derived K = floor(N * C_S / log 2) = floor(" << f.n << " * " << format_number(cs)
          << " / " << format_number(std::numbers::ln2) << ") = " << cfg.k << '\n';
    if (cfg.k == 0) throw ConfigError("secrecy capacity rule gives K = 0; increase N or the SNR gap");
  } else {
    if (f.k == 0) throw ConfigError("--k or --at-secrecy-capacity is required");
    cfg.k = f.k;
  }
  cfg.validate();
  notes << "# k_tilde=" << cfg.k_tilde() << (f.k_tilde ? " (override)" : " (key_length rule)")
        << '\n';
  return cfg;
}

void enforce_budget(const CodecConfig& cfg, std::uint64_t budget) {
  if (cfg.total_dim() > budget) {
    throw ResourceError("K + K~ = " + std::to_string(cfg.total_dim()) +
                        " exceeds the enumeration budget of " + std::to_string(budget) +
                        "; lower N or K (or raise --enumeration-budget)");
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Gaussian random field wiretap coding: replica predictions and simulations"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "key=value config file with [subcommand] sections");
  app.require_subcommand(1);

  std::string units = "nats";
  std::string out_path, out_dir;
  app.add_option("--units", units, "nats or bits")->check(CLI::IsMember({"nats", "bits"}));
  auto* out_opt = app.add_option("--out", out_path, "output file (default stdout)");
  app.add_option("--out-dir", out_dir, "directory; output goes to <subcommand>.csv")
      ->excludes(out_opt);

  Science sci;
  std::string rates, bracket;
  double grid_step = 1e-3, tol = 1e-5;
  int quad_order = kDefaultQuadratureOrder;
  auto add_science = [&](CLI::App* sub) {
    sub->add_option("--lambda", sci.lambda, "covariance order")->required();
    sub->add_option("--power", sci.power, "field power P")->required();
    sub->add_option("--sigma-sq", sci.sigma_sq, "noise variance")->required();
    sub->add_option("--grid-step", grid_step, "energy minimization grid step");
    sub->add_option("--quad-order", quad_order, "Gauss-Hermite nodes");
  };

  auto* scan = app.add_subcommand("replica-scan", "overlap and information rate over a rate grid");
  add_science(scan);
  scan->add_option("--rates", rates, "lo:hi:step")->required();

  auto* crit = app.add_subcommand("critical-rate", "locate the first-order transition");
  add_science(crit);
  crit->add_option("--bracket", bracket, "lo:hi (default heuristic +- 0.5)");
  crit->add_option("--tol", tol, "bisection tolerance");

  CodecFlags codec;
  std::uint64_t trials = 0, samples = 0, realizations = 1, leakage_samples = 0;
  bool freeze_field = false, freeze_plan = false;
  std::string dump_field;
  auto* sim = app.add_subcommand("simulate", "end-to-end Monte Carlo trials");
  add_codec_flags(sim, codec);
  sim->add_option("--trials", trials)->required()->check(CLI::PositiveNumber);
  sim->add_flag("--freeze-field", freeze_field, "reuse one field for all trials");
  sim->add_flag("--freeze-plan", freeze_plan, "reuse one permutation for all trials");
  sim->add_option("--leakage-samples", leakage_samples, "leakage estimate on trial 0 artifacts");
  sim->add_option("--dump-field", dump_field, "write the trial-0 field as a binary dump");

  auto* leak = app.add_subcommand("leakage", "eavesdropper mutual information estimates");
  add_codec_flags(leak, codec);
  leak->add_option("--samples", samples)->required()->check(CLI::PositiveNumber);
  leak->add_option("--realizations", realizations, "independent (field, permutation) draws")
      ->check(CLI::PositiveNumber);

  FieldSpec fspec;
  std::string inner_list = "-1,-0.5,0,0.5,1";
  std::uint64_t n_fields = 0;
  auto* fcheck = app.add_subcommand("field-check", "empirical covariance of resampled fields");
  fcheck->add_option("--dim", fspec.dim, "input dimension")->required();
  fcheck->add_option("--n-out", fspec.n_out, "outputs")->required();
  fcheck->add_option("--lambda", fspec.order, "covariance order")->required();
  fcheck->add_option("--power", fspec.power, "field power P")->required();
  fcheck->add_option("--fields", n_fields, "number of resampled fields")->required();
  fcheck->add_option("--seed", fspec.seed, "base seed");
  fcheck->add_option("--inner", inner_list, "comma-separated inner products");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  const unsigned threads = env_threads();
  const double nat_scale = units == "bits" ? std::numbers::ln2 : 1.0;
  CLI::App* chosen = app.get_subcommands().front();

  std::ostringstream notes, body;

  if (chosen == scan || chosen == crit) {
    if (!(grid_step > 0.0)) throw InputError("--grid-step must be positive");
    if (quad_order < 1) throw InputError("--quad-order must be positive");
  }
  std::optional<QuadratureRule> rule;
  auto replica_template = [&] {
    rule = QuadratureRule::gauss_hermite(quad_order);
    ReplicaConfig cfg;
    cfg.order = sci.lambda;
    cfg.power = sci.power;
    cfg.sigma_sq = sci.sigma_sq;
    cfg.grid_step = grid_step;
    cfg.quadrature = &*rule;
    ReplicaConfig probe = cfg;
    probe.validate();
    return cfg;
  };

  if (chosen == scan) {
    const Triple g = parse_grid(rates);
    const ReplicaConfig cfg = replica_template();
    const auto points = scan_rates(cfg, g.lo, g.hi, g.step, threads);
    write_scan_table(body, points, nat_scale);
  } else if (chosen == crit) {
    if (sci.lambda == 1) {
      throw InputError(
          "critical-rate needs lambda >= 2: for a linear field the overlap never reaches zero, "
          "so there is no all-or-nothing transition to locate");
    }
    const ReplicaConfig cfg = replica_template();
    const double heuristic = critical_rate_heuristic(sci.power, sci.sigma_sq);
    double lo = std::max(1e-3, heuristic - 0.5), hi = heuristic + 0.5;
    if (!bracket.empty()) {
      const auto v = split_numbers(bracket, ':');
      if (v.size() != 2 || !(v[0] < v[1]) || !(v[0] > 0.0)) {
        throw InputError("--bracket must be lo:hi with 0 < lo < hi");
      }
      lo = v[0];
      hi = v[1];
    }
    const double located = locate_critical_rate(cfg, lo, hi, tol);
    body << "# table=critical-rate format=" << kTableFormatVersion << '\n';
    body << "lambda,located,heuristic,difference\n";
    body << sci.lambda << ',' << format_number(located) << ',' << format_number(heuristic) << ','
         << format_number(located - heuristic) << '\n';
  } else if (chosen == sim) {
    const CodecConfig cfg = to_codec(codec, notes);
    enforce_budget(cfg, codec.enumeration_budget);
    ExperimentOptions opts;
    opts.freeze_field = freeze_field;
    opts.freeze_plan = freeze_plan;
    opts.leakage_samples = leakage_samples;
    opts.threads = threads;
    opts.enumeration_budget = codec.enumeration_budget;
    opts.coefficient_budget = codec.coefficient_budget;
    const SimReport rep = run_experiment(cfg, trials, opts);
    if (!dump_field.empty()) {
      std::ofstream fs(dump_field, std::ios::binary);
      if (!fs) throw InputError("cannot open '" + dump_field + "' for writing");
      trial_field(cfg, 0, freeze_field, codec.coefficient_budget).save(fs);
    }
    write_sim_report(body, rep, nat_scale);
  } else if (chosen == leak) {
    const CodecConfig cfg = to_codec(codec, notes);
    enforce_budget(cfg, codec.enumeration_budget);
    MmseOptions mmse;
    mmse.max_dim = codec.enumeration_budget;
    std::vector<LeakageRow> rows;
    for (std::uint64_t r = 0; r < realizations; ++r) {
      const GaussianField field = trial_field(cfg, r, false, codec.coefficient_budget);
      const BinningPlan plan = trial_plan(cfg, r, false);
      rows.push_back({r, estimate_leakage(cfg, field, plan, samples, r, mmse)});
    }
    write_leakage_table(body, rows, nat_scale);
  } else if (chosen == fcheck) {
    const auto inner = split_numbers(inner_list, ',');
    write_covariance_table(body, field_covariance_check(fspec, inner, n_fields));
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ostringstream header;
  header << "# secfield " << chosen->get_name() << '\n';
  header << "# started=" << started << " wall_seconds=" << format_number(wall) << '\n';
  // Reloadable as --config after stripping the "# " prefix.
  header << "# units=\"" << units << "\"\n";
  header << "# [" << chosen->get_name() << "]\n";
  std::istringstream cfg_text(chosen->config_to_str(true, false));
  for (std::string line; std::getline(cfg_text, line);) {
    if (!line.empty()) header << "# " << line << '\n';
  }
  header << notes.str();

  std::ofstream file;
  std::ostream* os = &std::cout;
  std::string target = out_path;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    target = (std::filesystem::path(out_dir) / (chosen->get_name() + ".csv")).string();
  }
  if (!target.empty()) {
    file.open(target);
    if (!file) throw InputError("cannot open '" + target + "' for writing");
    os = &file;
  }
  *os << header.str() << body.str();
  os->flush();
  if (!*os) throw ResourceError("failed to write output");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "secfield: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "secfield: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ResourceError& e) {
    std::cerr << "secfield: " << e.what() << '\n';
    return kExitResource;
  } catch (const BracketError& e) {
    std::cerr << "secfield: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DomainError& e) {
    std::cerr << "secfield: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "secfield: " << e.what() << '\n';
    return 1;
  }
}
