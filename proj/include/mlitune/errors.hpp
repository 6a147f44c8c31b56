#pragma once

#include <stdexcept>
#include <string>

namespace mlitune {

/// Invalid inverter, objective or optimizer parameters (dimension mismatch,
/// negative voltages, angles outside the quarter period, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A loaded circuit whose total series resistance is zero.
class SingularCircuitError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Bad argument to a spectral routine (length not a power of two, cutoff
/// above Nyquist, empty input).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// THD requested for a spectrum with zero fundamental.
class UndefinedThdError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Optimizer step called out of sequence (e.g. PSO before initial evaluation).
class OrderingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// ask/tell misuse: unknown candidate id, tell twice, ask with nothing to hand out.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Scenario document is malformed or violates the schema.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mlitune
