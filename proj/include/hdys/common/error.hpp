#pragma once

#include <stdexcept>
#include <string>

namespace hdys {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Usage or configuration problems. The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor shapes incompatible with the requested kernel.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A forward value or simulator state left the finite range.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class GraphError : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated or wrong-version files.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Requested muscle torque lies outside the reachable torque polytope.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, long frame = -1)
      : Error(what), frame_(frame) {}
  long frame() const { return frame_; }

 private:
  long frame_;
};

/// Every loss term is masked out for a batch; the configuration cannot train.
class DeadConfigError : public Error {
 public:
  using Error::Error;
};

class DivergedRolloutError : public Error {
 public:
  using Error::Error;
};

}  // namespace hdys
