#pragma once

#include <stdexcept>
#include <string>

namespace curvlab {

// Input or parameter violates a documented precondition (CLI exit code 1).
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver exhausted its budget without meeting tolerance (CLI exit code 2).
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// File or stream problem (CLI exit code 3).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace curvlab
