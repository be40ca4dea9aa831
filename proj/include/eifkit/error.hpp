#pragma once

#include <stdexcept>
#include <string>

namespace eifkit {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the domain of an operation (invalid point,
// zero-mass conditioning event, wrong variable layout).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A conditional probability that appears in a denominator fell below the
// distribution's positivity floor.
class PositivityError : public Error {
 public:
  using Error::Error;
};

// A caller-side precondition failed (path leaves the simplex, step too large).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// The distribution does not satisfy a semiparametric model restriction.
class ModelError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration or input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace eifkit
