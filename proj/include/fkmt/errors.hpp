#pragma once

#include <stdexcept>
#include <string>

namespace fkmt {

// Base of every error raised by the library. Each subclass corresponds to one
// failure mode a caller may want to dispatch on (the CLI maps them to exit codes).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Gap condition cannot be certified: no minimum, or a continuum of minima.
class GapConditionFailed : public Error {
public:
  using Error::Error;
};

// A tail of the configuration is not a minimizing constant, so J1 diverges.
class TailNotMinimal : public Error {
public:
  using Error::Error;
};

class TailNotInGap : public Error {
public:
  using Error::Error;
};

class InvalidPattern : public Error {
public:
  using Error::Error;
};

class PatternWindowMismatch : public Error {
public:
  using Error::Error;
};

class RhoSelectionFailed : public Error {
public:
  using Error::Error;
};

class DegenerateFront : public Error {
public:
  using Error::Error;
};

class MissingLevel : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace fkmt
