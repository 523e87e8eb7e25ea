#pragma once

#include <stdexcept>
#include <string>

namespace nerclust {

// Error categories map onto CLI exit codes: usage 1, data 2, numerical 3.

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nerclust
