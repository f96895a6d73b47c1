#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <vector>

#include "secfield/channel_math.hpp"
#include "secfield/codec.hpp"
#include "secfield/errors.hpp"
#include "secfield/gaussian_field.hpp"
#include "secfield/replica.hpp"
#include "secfield/simulator.hpp"

namespace py = pybind11;
using namespace secfield;

namespace {

ReplicaConfig replica_config(double rate, double sigma_sq, double power, int order,
                             double grid_step) {
  ReplicaConfig cfg;
  cfg.rate = rate;
  cfg.sigma_sq = sigma_sq;
  cfg.power = power;
  cfg.order = order;
  cfg.grid_step = grid_step;
  return cfg;
}

py::dict solution_dict(const ReplicaSolution& s) {
  py::dict d;
  d["m_star"] = s.m_star;
  d["info_rate"] = s.info_rate;
  d["energy_at_0"] = s.energy_at_0;
  d["energy_at_1"] = s.energy_at_1;
  d["fixed_point_residual"] = s.fixed_point_residual;
  d["tie_flag"] = s.tie_flag;
  d["stationary_points"] = s.stationary_points;
  return d;
}

py::dict trial_dict(const TrialRecord& t) {
  py::dict d;
  d["trial_id"] = t.trial_id;
  d["message"] = t.message;
  d["decoded"] = t.decoded;
  d["bit_errors"] = t.bit_errors;
  d["flip_fraction"] = t.flip_fraction;
  d["overlap"] = t.overlap;
  d["overlap_sign"] = t.overlap_sign;
  d["bound_ok"] = t.bound_ok;
  return d;
}

py::dict leakage_dict(const LeakageEstimate& e) {
  py::dict d;
  d["n_samples"] = e.n_samples;
  d["message"] = e.message;
  d["message_se"] = e.message_se;
  d["codeword"] = e.codeword;
  d["codeword_se"] = e.codeword_se;
  d["key"] = e.key;
  d["key_se"] = e.key_se;
  d["chain_residual"] = e.chain_residual;
  d["chain_se"] = e.chain_se;
  return d;
}

}  // namespace

PYBIND11_MODULE(_secfield, m) {
  m.doc() = "Random-field wiretap coding: replica analysis, exact MMSE decoding, simulation.";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_MemoryError);
  py::register_exception<BracketError>(m, "BracketError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);

  m.def(
      "solve_overlap",
      [](double rate, double sigma_sq, double power, int order, double grid_step) {
        return solution_dict(solve_overlap(replica_config(rate, sigma_sq, power, order, grid_step)));
      },
      py::arg("rate"), py::arg("sigma_sq"), py::arg("power") = 1.0, py::arg("order") = 3,
      py::arg("grid_step") = 1e-3);

  m.def(
      "scan_rates",
      [](double lo, double hi, double step, double sigma_sq, double power, int order,
         unsigned threads) {
        auto points = scan_rates(replica_config(lo, sigma_sq, power, order, 1e-3), lo, hi, step,
                                 threads);
        py::list out;
        for (const auto& p : points) {
          py::dict d = solution_dict(p.solution);
          d["rate"] = p.rate;
          out.append(d);
        }
        return out;
      },
      py::arg("lo"), py::arg("hi"), py::arg("step"), py::arg("sigma_sq"), py::arg("power") = 1.0,
      py::arg("order") = 3, py::arg("threads") = 1u);

  m.def(
      "locate_critical_rate",
      [](double lo, double hi, double sigma_sq, double power, int order, double tol) {
        return locate_critical_rate(replica_config(lo, sigma_sq, power, order, 1e-3), lo, hi, tol);
      },
      py::arg("lo"), py::arg("hi"), py::arg("sigma_sq"), py::arg("power") = 1.0,
      py::arg("order") = 3, py::arg("tol") = 1e-5);

  m.def("critical_rate_heuristic", &critical_rate_heuristic, py::arg("power"),
        py::arg("sigma_sq"));
  m.def("awgn_capacity", &awgn_capacity, py::arg("snr"));
  m.def(
      "secrecy_capacity",
      [](double power, double sigma_b_sq, double sigma_e_sq) {
        return secrecy_capacity({power, sigma_b_sq, sigma_e_sq});
      },
      py::arg("power"), py::arg("sigma_b_sq"), py::arg("sigma_e_sq"));
  m.def("key_length", &key_length, py::arg("n"), py::arg("power"), py::arg("sigma_e_sq"));

  py::class_<GaussianField>(m, "GaussianField")
      .def_property_readonly("n_out", [](const GaussianField& f) { return f.spec().n_out; })
      .def_property_readonly("dim", [](const GaussianField& f) { return f.spec().dim; })
      .def_property_readonly("order", [](const GaussianField& f) { return f.spec().order; })
      .def_property_readonly("power", [](const GaussianField& f) { return f.spec().power; })
      .def_property_readonly("seed", [](const GaussianField& f) { return f.spec().seed; })
      .def("evaluate",
           [](const GaussianField& f, const std::vector<double>& s) { return f.evaluate(s); });

  m.def(
      "sample_field",
      [](std::uint64_t n_out, std::uint64_t dim, int order, double power, std::uint64_t seed) {
        FieldSpec spec;
        spec.n_out = n_out;
        spec.dim = dim;
        spec.order = order;
        spec.power = power;
        spec.seed = seed;
        return sample_field(spec);
      },
      py::arg("n_out"), py::arg("dim"), py::arg("order") = 3, py::arg("power") = 1.0,
      py::arg("seed") = 0);

  m.def(
      "mmse",
      [](const GaussianField& f, const std::vector<double>& y, double sigma_sq) {
        auto r = mmse_estimate(f, y, sigma_sq);
        return py::make_tuple(r.r, r.log_partition);
      },
      py::arg("field"), py::arg("y"), py::arg("sigma_sq"));

  py::class_<CodecConfig>(m, "CodecConfig")
      .def(py::init<>())
      .def_readwrite("n", &CodecConfig::n)
      .def_readwrite("k", &CodecConfig::k)
      .def_readwrite("k_tilde_override", &CodecConfig::k_tilde_override)
      .def_readwrite("order", &CodecConfig::order)
      .def_readwrite("allow_ablation", &CodecConfig::allow_ablation)
      .def_readwrite("power", &CodecConfig::power)
      .def_readwrite("sigma_b_sq", &CodecConfig::sigma_b_sq)
      .def_readwrite("sigma_e_sq", &CodecConfig::sigma_e_sq)
      .def_readwrite("field_seed", &CodecConfig::field_seed)
      .def_readwrite("perm_seed", &CodecConfig::perm_seed)
      .def_readwrite("key_seed", &CodecConfig::key_seed)
      .def_readwrite("noise_seed", &CodecConfig::noise_seed)
      .def("validate", &CodecConfig::validate)
      .def("k_tilde", &CodecConfig::k_tilde);

  m.def(
      "run_experiment",
      [](const CodecConfig& cfg, std::uint64_t trials, bool freeze_field, bool freeze_plan,
         std::uint64_t leakage_samples, unsigned threads) {
        ExperimentOptions opt;
        opt.freeze_field = freeze_field;
        opt.freeze_plan = freeze_plan;
        opt.leakage_samples = leakage_samples;
        opt.threads = threads;
        SimReport rep;
        {
          py::gil_scoped_release release;
          rep = run_experiment(cfg, trials, opt);
        }
        py::dict d;
        d["n_trials"] = rep.n_trials;
        d["k_tilde"] = rep.k_tilde;
        d["message_error_rate"] = rep.message_error_rate;
        d["nonzero_flip_rate"] = rep.nonzero_flip_rate;
        d["mean_f"] = rep.mean_f;
        d["mean_f_se"] = rep.mean_f_se;
        d["mean_overlap"] = rep.mean_overlap;
        d["mean_overlap_se"] = rep.mean_overlap_se;
        d["mean_bit_error_rate"] = rep.mean_bit_error_rate;
        d["all_bounds_ok"] = rep.all_bounds_ok;
        py::list trials_out;
        for (const auto& t : rep.trials) trials_out.append(trial_dict(t));
        d["trials"] = trials_out;
        d["leakage"] = rep.has_leakage ? py::object(leakage_dict(rep.leakage)) : py::none();
        return d;
      },
      py::arg("config"), py::arg("trials"), py::arg("freeze_field") = false,
      py::arg("freeze_plan") = false, py::arg("leakage_samples") = 0,
      py::arg("threads") = 1u);

  m.def(
      "estimate_leakage",
      [](const CodecConfig& cfg, std::uint64_t samples, std::uint64_t realization) {
        GaussianField field = trial_field(cfg, realization, false);
        BinningPlan plan = trial_plan(cfg, realization, false);
        LeakageEstimate e;
        {
          py::gil_scoped_release release;
          e = estimate_leakage(cfg, field, plan, samples, realization);
        }
        return leakage_dict(e);
      },
      py::arg("config"), py::arg("samples"), py::arg("realization") = 0);
}
