#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dcskel {

enum class ErrorKind {
  io,
  parse,
  invalid_argument,
  degenerate_input,
  cyclic_graph,
  insufficient_samples,
  singular_matrix,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::degenerate_input: return "degenerate-input";
    case ErrorKind::cyclic_graph: return "cyclic-graph";
    case ErrorKind::insufficient_samples: return "insufficient-samples";
    case ErrorKind::singular_matrix: return "singular-matrix";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the pipeline driver; wraps an inner Error with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& inner)
      : Error(inner.kind(), stage + ": " + inner.what()), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace dcskel
