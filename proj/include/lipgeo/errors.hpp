#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lipgeo {

/// Failure categories. Every error raised by the library carries one, so that
/// drivers can tell a declared boundary (chart exit, degeneracy, Zeno guard)
/// from a programming or input error.
enum class ErrorKind {
  domain,             // point outside the chart box
  degeneracy,         // |det g| at or below the degeneracy floor
  signature,          // eigenvalue sign pattern does not match the chart
  proximity,          // smooth-only evaluation requested too close to a switching surface
  surface_degeneracy, // vanishing surface gradient
  precondition,       // operation called outside its stated precondition
  evaluation,         // a user field could not be evaluated
  step_underflow,
  chart_exit,
  zeno,
  oracle_domain,
  stagnation,
  invalid_argument,
  config,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

/// Compact "%.9g" rendering for messages.
inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

}  // namespace lipgeo
