#pragma once

#include <stdexcept>
#include <string>

namespace biht {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A vector that must be normalized or decomposed is identically zero.
struct DegenerateIterate : Error {
  explicit DegenerateIterate(const std::string& msg) : Error(msg) {}
};

// A link function produced values outside [0, 1] or otherwise broke its
// contract.
struct InvalidLink : Error {
  explicit InvalidLink(const std::string& msg) : Error(msg) {}
};

// The requested quantity is undefined for the given link family.
struct UnsupportedLink : Error {
  explicit UnsupportedLink(const std::string& msg) : Error(msg) {}
};

// The two directions spanning a requested projection coincide (u = +/-v),
// so the orthogonal component is undefined.
struct DegenerateDirection : Error {
  explicit DegenerateDirection(const std::string& msg) : Error(msg) {}
};

// An argument violates a documented precondition.
struct InvalidParams : Error {
  explicit InvalidParams(const std::string& msg) : Error(msg) {}
};

// An experiment could not produce a usable aggregate (for example, every
// trial hit a degenerate iterate).
struct ExperimentFailed : Error {
  explicit ExperimentFailed(const std::string& msg) : Error(msg) {}
};

// A file could not be opened or written.
struct IoFailure : Error {
  explicit IoFailure(const std::string& msg) : Error(msg) {}
};

}  // namespace biht
