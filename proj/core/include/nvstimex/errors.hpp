#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace nvstimex {

namespace detail {
inline std::string format_time(double t_s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", t_s);
  return buf;
}
}  // namespace detail

// Adaptive integration could not proceed (step underflow, repeated rejection).
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& msg, double t_fail_s)
      : std::runtime_error(msg + " (at t = " + detail::format_time(t_fail_s) + " s)"),
        t_fail_s_(t_fail_s) {}

  double t_fail_s() const { return t_fail_s_; }

 private:
  double t_fail_s_;
};

// Steady-state relaxation did not converge within its horizon bound.
class ConvergenceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input data unsuitable for the requested fit (e.g. non-monotone recovery window).
class FitQualityError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed textual input (config documents, CSV streams).
class ParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nvstimex
