#pragma once

#include <stdexcept>

namespace rbfvmc {

// Base class for every failure the library reports.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller passed arguments outside an operation's domain.
struct ContractError : Error {
  using Error::Error;
};

// A computation produced a non-finite value.
struct NumericalError : Error {
  using Error::Error;
};

// |psi| fell below the division floor.
struct DivisionHazardError : NumericalError {
  using NumericalError::NumericalError;
};

// A parameter derivative does not exist at the current parameter value.
struct SingularityError : NumericalError {
  using NumericalError::NumericalError;
};

// Requested dense assembly exceeds the configured size cap.
struct SizeError : Error {
  using Error::Error;
};

// Stochastic reconfiguration could not produce a usable update.
struct OptimizerError : Error {
  using Error::Error;
};

// The reference eigensolver failed.
struct OracleError : Error {
  using Error::Error;
};

// Experiment configuration is malformed or inconsistent.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace rbfvmc
