#pragma once

#include <stdexcept>
#include <string>

namespace gphmm {

// Precondition violation in a library call or an invalid configuration value.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Unreadable or inconsistent input data: files, manifests, artifacts.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A numeric computation produced a non-finite or otherwise unusable result.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace gphmm
