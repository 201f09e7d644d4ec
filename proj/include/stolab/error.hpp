#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stolab {

enum class ErrorKind {
  Domain,
  Precondition,
  CouplingTooStrong,
  ConeEscape,
  Unbounded,
  Numerical,
  Config,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::CouplingTooStrong: return "coupling-too-strong";
    case ErrorKind::ConeEscape: return "cone-escape";
    case ErrorKind::Unbounded: return "unbounded";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

/// Base of every error raised by the library. The kind is machine readable
/// and ends up in the CLI error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace stolab
