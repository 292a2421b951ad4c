#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace atk {

// One metric row of the results CSV: header "config,metric,value,stderr".
// Values are printed with %.17g so a parse of the output reproduces the
// exact doubles; stderr is empty when not applicable. config/metric must
// not contain commas.
struct ResultRow {
  std::string config;
  std::string metric;
  double value = 0.0;
  std::optional<double> std_error;
};

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows);
std::string results_csv_string(std::span<const ResultRow> rows);

// Parses write_results_csv output (header required). Throws
// std::runtime_error on malformed input.
std::vector<ResultRow> parse_results_csv(std::istream& in);
std::vector<ResultRow> parse_results_csv_string(const std::string& text);

}  // namespace atk
