#pragma once

#include <stdexcept>
#include <string>

namespace htsr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class SchemaMismatchError : public Error {
 public:
  using Error::Error;
};

class RaggedDataError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Reconciliation normal equations could not be solved.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// MASE denominator is zero (constant training series).
class UndefinedScaleError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace htsr
