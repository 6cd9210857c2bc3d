#pragma once

#include <stdexcept>
#include <string>

namespace percpool {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not line up (operand mismatch, stale saved state).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid layer/model/experiment configuration, e.g. a pooling window that
/// does not tile its input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed dataset, checkpoint or other on-disk input.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace percpool
