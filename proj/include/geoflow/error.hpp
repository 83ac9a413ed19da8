#pragma once

#include <stdexcept>
#include <string>

namespace geoflow {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Point outside the chart, zero state, or similar argument outside the valid set.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DegenerateMetricError : public Error {
 public:
  using Error::Error;
};

class ToleranceError : public Error {
 public:
  using Error::Error;
};

class DegeneratePlaneError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class DeformationTooLargeError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace geoflow
