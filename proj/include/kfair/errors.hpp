#pragma once

#include <stdexcept>
#include <string>

namespace kfair {

/// Base class for all kfair errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent user input (model/schema/data files, CLI args).
class InputError : public Error {
 public:
  explicit InputError(const std::string& msg) : Error(msg) {}
};

/// Schema-level violation: invalid feature spec, empty combination space, ...
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& msg) : Error(msg) {}
};

/// Numerical failure (divergence, singular basis that cannot be skipped).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace kfair
