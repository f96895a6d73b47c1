#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "secfield/field_check.hpp"
#include "secfield/replica.hpp"
#include "secfield/simulator.hpp"

namespace secfield {

// Comma-separated tables with '#'-prefixed header/footer lines. Each table
// starts with "# table=<name> format=<version>" followed by one column row.
// Nat-valued columns are divided by `nat_scale` (1 for nats, log 2 for bits).

inline constexpr int kTableFormatVersion = 1;

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

void write_scan_table(std::ostream& os, std::span<const RatePoint> points, double nat_scale);

void write_sim_report(std::ostream& os, const SimReport& report, double nat_scale);

struct LeakageRow {
  std::uint64_t realization = 0;
  LeakageEstimate estimate;
};
void write_leakage_table(std::ostream& os, std::span<const LeakageRow> rows, double nat_scale);

void write_covariance_table(std::ostream& os, std::span<const CovarianceRow> rows);

/// Column names of a table written by the functions above (first non-'#' line).
std::vector<std::string> read_table_columns(std::istream& is);

}  // namespace secfield
