#pragma once

#include <stdexcept>
#include <string>

namespace spinlab {

//! Invalid configuration, bad input document, or violated precondition.
//! CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

//! Requested accuracy is unreachable with the given grid resolution.
//! CLI exit code 1 (fixable by configuration).
class ResolutionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

//! Iterative solver failed to converge within its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

//! An internal identity that must hold by construction was violated.
//! CLI exit code 2.
class ConsistencyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

//! A study produced data too degenerate to fit. CLI exit code 3.
class DegenerateFitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace spinlab
