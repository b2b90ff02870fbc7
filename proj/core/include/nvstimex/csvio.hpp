#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nvstimex/model.hpp"

namespace nvstimex {

// Locale-independent float formatting, 9 significant digits. All CSV output
// goes through this so identical runs are byte-identical.
std::string format_double(double value);

// One `# key = value` metadata line per model parameter.
std::vector<std::string> params_metadata(const ModelParams& params);

void write_csv(std::ostream& out, const std::vector<std::string>& comment_lines,
               const std::string& header,
               const std::vector<std::vector<double>>& columns);

// Reads a two-column numeric CSV (comments `#`, optional header row).
// Throws ParseError with the offending line number.
std::vector<std::pair<double, double>> read_two_column_csv(std::istream& in);

}  // namespace nvstimex
