#pragma once

#include <stdexcept>
#include <string>

namespace pbf {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class RangeError : public Error {
  public:
    using Error::Error;
};

class DimensionError : public Error {
  public:
    using Error::Error;
};

class ArgumentError : public Error {
  public:
    using Error::Error;
};

class GeometryError : public Error {
  public:
    using Error::Error;
};

/// Explicit scheme would be unstable for the requested mesh and time step.
class StabilityError : public Error {
  public:
    using Error::Error;
};

/// A controllability or lifting precondition does not hold (e.g. an empty sample set).
class PreconditionError : public Error {
  public:
    using Error::Error;
};

/// Measurement kind cannot be expressed as a fixed linear sampling vector.
class UnsupportedMeasurementError : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    ParseError(int line, const std::string& what)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

  private:
    int line_;
};

} // namespace pbf
