// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace mxisac {

enum class ErrorKind {
  configuration,
  degenerate_geometry,
  shape_mismatch,
  domain,
  rank_deficiency,
  state,
  retraction,
  division_by_zero,
  io,
  parse,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; `kind()` lets callers branch on the
// failure class without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::configuration: return "configuration error";
    case ErrorKind::degenerate_geometry: return "degenerate geometry";
    case ErrorKind::shape_mismatch: return "shape mismatch";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::rank_deficiency: return "rank deficiency";
    case ErrorKind::state: return "state error";
    case ErrorKind::retraction: return "retraction error";
    case ErrorKind::division_by_zero: return "division by zero";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::parse: return "parse error";
  }
  return "error";
}

}  // namespace mxisac
