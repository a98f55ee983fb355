#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace cpcp {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, inconsistent shapes, invalid parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical step could not be carried out (singular system, empty signal).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A graph row has no outgoing weight, so no transition distribution exists.
class DegenerateGraphError : public NumericalError {
 public:
  DegenerateGraphError(Eigen::Index instance, const std::string& what)
      : NumericalError(what), instance_(instance) {}

  Eigen::Index instance() const noexcept { return instance_; }

 private:
  Eigen::Index instance_;
};

}  // namespace cpcp
