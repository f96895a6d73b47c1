#include "secfield/report.hpp"

#include <fmt/format.h>

#include <istream>
#include <ostream>
#include <sstream>

#include "secfield/numerics.hpp"

namespace secfield {

namespace {

void table_banner(std::ostream& os, const char* name) {
  os << "# table=" << name << " format=" << kTableFormatVersion << '\n';
}

}  // namespace

std::string format_number(double v) { return fmt::format("{}", v); }

void write_scan_table(std::ostream& os, std::span<const RatePoint> points, double nat_scale) {
  table_banner(os, "replica-scan");
  os << "rate,m_star,info_rate,energy_at_0,energy_at_1,fixed_point_residual\n";
  for (const auto& p : points) {
    const auto& s = p.solution;
    os << format_number(p.rate) << ',' << format_number(s.m_star) << ','
       << format_number(s.info_rate / nat_scale) << ',' << format_number(s.energy_at_0 / nat_scale)
       << ',' << format_number(s.energy_at_1 / nat_scale) << ','
       << format_number(s.fixed_point_residual) << '\n';
  }
}

void write_sim_report(std::ostream& os, const SimReport& r, double nat_scale) {
  table_banner(os, "simulate");
  os << "trial_id,message,decoded,bit_errors,flip_fraction,overlap,overlap_sign,bound_ok\n";
  for (const auto& t : r.trials) {
    os << t.trial_id << ',' << t.message << ',' << t.decoded << ',' << t.bit_errors << ','
       << format_number(t.flip_fraction) << ',' << format_number(t.overlap) << ','
       << format_number(t.overlap_sign) << ',' << (t.bound_ok ? 1 : 0) << '\n';
  }
  os << "# summary\n";
  os << "# n_trials=" << r.n_trials << '\n';
  os << "# k_tilde=" << r.k_tilde << '\n';
  os << "# message_error_rate=" << format_number(r.message_error_rate) << '\n';
  os << "# nonzero_flip_rate=" << format_number(r.nonzero_flip_rate) << '\n';
  os << "# mean_bit_error_rate=" << format_number(r.mean_bit_error_rate) << '\n';
  os << "# mean_f=" << format_number(r.mean_f) << " se=" << format_number(r.mean_f_se) << '\n';
  os << "# mean_overlap=" << format_number(r.mean_overlap)
     << " se=" << format_number(r.mean_overlap_se) << '\n';
  os << "# all_bounds_ok=" << (r.all_bounds_ok ? 1 : 0) << '\n';
  if (r.has_leakage) {
    const auto& l = r.leakage;
    os << "# leakage=" << format_number(l.message / nat_scale)
       << " se=" << format_number(l.message_se / nat_scale) << " samples=" << l.n_samples << '\n';
  }
}

void write_leakage_table(std::ostream& os, std::span<const LeakageRow> rows, double nat_scale) {
  table_banner(os, "leakage");
  os << "realization,samples,message,message_se,codeword,codeword_se,key,key_se,chain_residual,"
        "chain_se\n";
  std::vector<double> msg;
  for (const auto& row : rows) {
    const auto& e = row.estimate;
    os << row.realization << ',' << e.n_samples << ',' << format_number(e.message / nat_scale)
       << ',' << format_number(e.message_se / nat_scale) << ','
       << format_number(e.codeword / nat_scale) << ',' << format_number(e.codeword_se / nat_scale)
       << ',' << format_number(e.key / nat_scale) << ',' << format_number(e.key_se / nat_scale)
       << ',' << format_number(e.chain_residual / nat_scale) << ','
       << format_number(e.chain_se / nat_scale) << '\n';
    msg.push_back(e.message / nat_scale);
  }
  if (rows.size() > 1) {
    const auto [mean, se] = mean_and_se(msg);
    os << "# summary\n# realizations=" << rows.size() << "\n# mean_leakage=" << format_number(mean)
       << " se_over_realizations=" << format_number(se) << '\n';
  }
}

void write_covariance_table(std::ostream& os, std::span<const CovarianceRow> rows) {
  table_banner(os, "field-check");
  os << "inner,theory,empirical,stderr,z,cross_empirical,cross_stderr,cross_z,kurtosis\n";
  for (const auto& r : rows) {
    const double z = (r.same_output - r.theory) / r.same_output_se;
    const double cz = r.cross_output / r.cross_output_se;
    os << format_number(r.inner) << ',' << format_number(r.theory) << ','
       << format_number(r.same_output) << ',' << format_number(r.same_output_se) << ','
       << format_number(z) << ',' << format_number(r.cross_output) << ','
       << format_number(r.cross_output_se) << ',' << format_number(cz) << ','
       << format_number(r.kurtosis) << '\n';
  }
}

std::vector<std::string> read_table_columns(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::istringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    return cols;
  }
  return {};
}

}  // namespace secfield
