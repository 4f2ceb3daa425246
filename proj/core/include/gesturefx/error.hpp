#pragma once

#include <stdexcept>
#include <string>

namespace gesturefx {

// Root of every error the library throws. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A scalar or enum argument is outside its domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A TS-LSTM / model configuration cannot be realized.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A tape or gradient container does not belong to the model it is used with.
class StateError : public Error {
 public:
  using Error::Error;
};

// Input violates an operation's precondition (missing joints, unlabeled data, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Training or evaluation data is unusable (e.g. an unlabeled sample).
class DataError : public Error {
 public:
  using Error::Error;
};

class DegeneratePoseError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// A dropped-keypoint run is longer than the stabilizer may bridge.
class GapError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Checkpoint written by an incompatible format version.
class MigrationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gesturefx
