#pragma once

#include <stdexcept>
#include <string>

namespace kpe {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated (dimension mismatch etc).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class EmptyDictionary : public Error {
 public:
  EmptyDictionary() : Error("dictionary is empty") {}
};

/// |1 + v^T B^-1 u| fell below the singularity floor.
class SingularUpdate : public Error {
 public:
  using Error::Error;
};

/// The Schur complement of a bordered matrix fell below the singularity floor.
class SingularGrowth : public Error {
 public:
  using Error::Error;
};

/// A dense reference solve hit a singular system.
class OracleSingular : public Error {
 public:
  using Error::Error;
};

/// The maintained inverse drifted away from its definition.
class NumericalDrift : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kpe
