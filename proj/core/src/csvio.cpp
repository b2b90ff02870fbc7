#include "nvstimex/csvio.hpp"

#include <charconv>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <system_error>

#include "nvstimex/errors.hpp"

namespace nvstimex {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 9);
  if (res.ec != std::errc{}) return "nan";
  return std::string(buf, res.ptr);
}

std::vector<std::string> params_metadata(const ModelParams& params) {
  std::vector<std::string> lines;
  auto add = [&lines](const std::string& key, double v) {
    lines.push_back(key + " = " + format_double(v));
  };
  add("l21_hz", params.rates.l21_hz);
  add("l23_hz", params.rates.l23_hz);
  add("l31_hz", params.rates.l31_hz);
  add("green_rate_hz", params.pump.green_rate_hz);
  if (params.pulses) {
    add("eq_rate_hz", params.pulses->eq_rate_hz);
    add("red2_rate_hz", params.pulses->red2_rate_hz);
    add("sigma_t_s", params.pulses->sigma_t_s);
    add("eq_width_s", params.pulses->eq_width_s);
    add("period_s", params.pulses->period_s);
    add("t0_s", params.pulses->t0_s);
  }
  return lines;
}

void write_csv(std::ostream& out, const std::vector<std::string>& comment_lines,
               const std::string& header,
               const std::vector<std::vector<double>>& columns) {
  for (const auto& line : comment_lines) out << "# " << line << "\n";
  out << header << "\n";
  if (columns.empty()) return;
  const std::size_t rows = columns.front().size();
  for (const auto& col : columns)
    if (col.size() != rows)
      throw std::invalid_argument("write_csv: ragged columns");
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out << ",";
      out << format_double(columns[c][r]);
    }
    out << "\n";
  }
}

std::vector<std::pair<double, double>> read_two_column_csv(std::istream& in) {
  std::vector<std::pair<double, double>> rows;
  std::string line;
  long line_no = 0;
  bool saw_content = false;

  auto parse_field = [](const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
  };
  auto trim = [](const std::string& s) -> std::string {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto comma = text.find(',');
    if (comma == std::string::npos)
      throw ParseError("csv: line " + std::to_string(line_no) +
                       ": expected two comma-separated columns");
    double a = 0.0, b = 0.0;
    const std::string left = trim(text.substr(0, comma));
    const std::string right = trim(text.substr(comma + 1));
    if (!parse_field(left, a)) {
      if (!saw_content) continue;  // header row
      throw ParseError("csv: line " + std::to_string(line_no) +
                       ": cannot parse '" + left + "'");
    }
    if (!parse_field(right, b))
      throw ParseError("csv: line " + std::to_string(line_no) +
                       ": cannot parse '" + right + "'");
    saw_content = true;
    rows.emplace_back(a, b);
  }
  return rows;
}

}  // namespace nvstimex
