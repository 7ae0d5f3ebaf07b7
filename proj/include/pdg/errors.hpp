#pragma once

#include <stdexcept>
#include <string>

namespace pdg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when a packed state violates its invariants (e.g. non-positive mass).
class InvalidState : public Error {
 public:
  using Error::Error;
};

class PropagationFailure : public Error {
 public:
  PropagationFailure(int interval, const std::string& what)
      : Error("propagation failed on interval " + std::to_string(interval) + ": " + what),
        interval_(interval) {}
  int interval() const { return interval_; }

 private:
  int interval_;
};

class DegenerateReference : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  SolverFailure(int iteration, const std::string& what)
      : Error("solve failed at iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class SamplingFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace pdg
