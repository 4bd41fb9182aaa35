#pragma once

#include <stdexcept>
#include <string>

namespace wsfe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (text or binary).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Shape disagreement between operands (dimension, layer count, length).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Artifact metadata that does not match what a pipeline stage expects.
class MetadataError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace wsfe
