#pragma once

#include <stdexcept>
#include <string>

namespace dialectqe {

enum class ErrorKind {
  parse,        // malformed input file or document
  validation,   // well-formed input violating a contract (range, duplicate, size)
  config,       // bad or inconsistent configuration
  degenerate,   // zero-variance / statistically degenerate input
  transport,    // network failure after retries
  provider,     // non-2xx or malformed provider response
  score_parse,  // completion contained no usable score
  dimension,    // embedding/head dimension mismatch
  format,       // unsupported version or corrupt artifact file
  io,           // filesystem failure
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::config: return "config";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::transport: return "transport";
    case ErrorKind::provider: return "provider";
    case ErrorKind::score_parse: return "score_parse";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::format: return "format";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace dialectqe
