#include "atk/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace atk {

namespace {

void check_field(const std::string& field) {
  if (field.find(',') != std::string::npos ||
      field.find('\n') != std::string::npos)
    throw std::invalid_argument("csv fields must not contain ',' or newline: " +
                                field);
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, std::size_t line_no) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw std::runtime_error("csv line " + std::to_string(line_no) +
                             ": bad number '" + text + "'");
  return v;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r')
    fields.back().pop_back();
  return fields;
}

}  // namespace

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << "config,metric,value,stderr\n";
  for (const auto& row : rows) {
    check_field(row.config);
    check_field(row.metric);
    out << row.config << ',' << row.metric << ',' << format_g17(row.value)
        << ',';
    if (row.std_error) out << format_g17(*row.std_error);
    out << '\n';
  }
}

std::string results_csv_string(std::span<const ResultRow> rows) {
  std::ostringstream out;
  write_results_csv(out, rows);
  return out.str();
}

std::vector<ResultRow> parse_results_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<ResultRow> rows;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (!saw_header) {
      if (fields.size() != 4 || fields[0] != "config" ||
          fields[1] != "metric" || fields[2] != "value" ||
          fields[3] != "stderr")
        throw std::runtime_error("csv: missing config,metric,value,stderr "
                                 "header");
      saw_header = true;
      continue;
    }
    if (fields.size() != 4)
      throw std::runtime_error("csv line " + std::to_string(line_no) +
                               ": expected 4 fields");
    ResultRow row;
    row.config = fields[0];
    row.metric = fields[1];
    row.value = parse_double(fields[2], line_no);
    if (!fields[3].empty()) row.std_error = parse_double(fields[3], line_no);
    rows.push_back(std::move(row));
  }
  if (!saw_header) throw std::runtime_error("csv: empty input");
  return rows;
}

std::vector<ResultRow> parse_results_csv_string(const std::string& text) {
  std::istringstream in(text);
  return parse_results_csv(in);
}

}  // namespace atk
