#pragma once

#include <stdexcept>
#include <string>

namespace hodge {

/// Error categories used across the library. The CLI maps these onto exit
/// codes, everything else carries a human-readable description.
enum class ErrorCode {
  invalid_argument,   // bad dimensions, mismatched degrees, malformed input
  singular_input,     // non-invertible or non-positive coefficient where required
  mesh_invalid,       // mesh fails a structural invariant
  config,             // config file / expression problems
  data_incompatible,  // compatibility condition on problem data violated
  spectrum_hit,       // lambda (numerically) in the spectrum of the pencil
  numerical,          // solver breakdown, residual failure, indefinite normal eqs
  io,                 // file system problems
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::singular_input: return "singular_input";
    case ErrorCode::mesh_invalid: return "mesh_invalid";
    case ErrorCode::config: return "config";
    case ErrorCode::data_incompatible: return "data_incompatible";
    case ErrorCode::spectrum_hit: return "spectrum_hit";
    case ErrorCode::numerical: return "numerical";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace hodge
