#pragma once

#include <iosfwd>
#include <string>

#include "nvstimex/config.hpp"

namespace nvstimex {

struct RunOptions {
  std::string out_dir = ".";
  bool quiet = false;
};

// Executes one experiment: writes CSV outputs under out_dir and prints a
// one-line summary to `out`. Diagnostics go to `err`.
// Returns 0 on success, 1 on validation errors, 2 on numerical failures.
int run(const RunConfig& config, ExperimentType subcommand, const RunOptions& options,
        std::ostream& out, std::ostream& err);

}  // namespace nvstimex
