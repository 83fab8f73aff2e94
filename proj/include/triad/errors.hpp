#pragma once

#include <stdexcept>
#include <string>

namespace triad {

// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pixel coordinate outside the image.
class BoundsError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Inputs that violate an operation's preconditions.
class InputError : public Error {
 public:
  using Error::Error;
};

// Evaluation requested on an empty pixel set.
class EmptyEvaluation : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Bad configuration or command-line usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The numerics produced nothing usable (e.g. every pixel degenerate).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace triad
