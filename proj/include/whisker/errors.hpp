#pragma once

#include <stdexcept>
#include <string>

namespace whisker {

// Configuration problems: a design, schema or argument that can never be
// evaluated. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problems with supplied data (samples, readings, traces). Exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGeometry : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class PoseCollision : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NonMonotoneDesign : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UnknownParameter : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class PointInsideMagnet : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DegenerateSamples : public DataError {
 public:
  using DataError::DataError;
};

class UnreachableReading : public DataError {
 public:
  using DataError::DataError;
};

class UndefinedOrientation : public DataError {
 public:
  using DataError::DataError;
};

class EmptyOverlap : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace whisker
