#pragma once

#include <stdexcept>
#include <string>

namespace blab {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside a documented precondition (radius out of [0,1), bad delta, ...).
class DomainError : public Error {
public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Malformed or inconsistent configuration (CLI configs, invalid rule sizes).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A kernel table was asked to evaluate outside its certified region.
class TruncationError : public Error {
public:
  TruncationError(const std::string& msg, long long required_k_max)
      : Error(msg), required_k_max(required_k_max) {}
  long long required_k_max;
};

// An adaptive routine stopped before reaching the requested tolerance.
class AccuracyError : public Error {
public:
  AccuracyError(const std::string& msg, double achieved)
      : Error(msg), achieved(achieved) {}
  double achieved;
};

// A map failed the numerical self-map certificate.
class NotSelfMapError : public Error {
public:
  explicit NotSelfMapError(const std::string& msg) : Error(msg) {}
};

// An input violated a contract the caller promised (e.g. non-Hermitian matrix).
class ContractViolation : public Error {
public:
  explicit ContractViolation(const std::string& msg) : Error(msg) {}
};

// A certification grid is too coarse for the requested geometry.
class ResolutionError : public Error {
public:
  explicit ResolutionError(const std::string& msg) : Error(msg) {}
};

}  // namespace blab
