#pragma once

#include <stdexcept>
#include <string>

namespace magnomech {

enum class ErrorKind {
  domain,
  commensurability,
  root_find,
  integration,
  limit_cycle,
  instability,
  singularity,
  parse,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::commensurability: return "commensurability";
    case ErrorKind::root_find: return "root_find";
    case ErrorKind::integration: return "integration";
    case ErrorKind::limit_cycle: return "limit_cycle";
    case ErrorKind::instability: return "instability";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Base class of every error thrown by the library. The kind lets callers
/// (notably the sweep engine) classify a failure without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class CommensurabilityError : public Error {
 public:
  explicit CommensurabilityError(const std::string& what)
      : Error(ErrorKind::commensurability, what) {}
};

class RootFindError : public Error {
 public:
  RootFindError(const std::string& what, double residual)
      : Error(ErrorKind::root_find, what + " (last residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double time)
      : Error(ErrorKind::integration, what + " at t=" + std::to_string(time)), time_(time) {}

  /// Time at which the integrator gave up (escape time for divergences).
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class LimitCycleError : public Error {
 public:
  explicit LimitCycleError(const std::string& what) : Error(ErrorKind::limit_cycle, what) {}
};

class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, double spectral_radius)
      : Error(ErrorKind::instability, what), spectral_radius_(spectral_radius) {}

  double spectral_radius() const noexcept { return spectral_radius_; }

 private:
  double spectral_radius_;
};

class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, std::string denominator)
      : Error(ErrorKind::singularity, what + " (" + denominator + ")"),
        denominator_(std::move(denominator)) {}

  /// Name of the denominator that degenerated, e.g. "B".
  const std::string& denominator() const noexcept { return denominator_; }

 private:
  std::string denominator_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace magnomech
