#pragma once

#include <stdexcept>
#include <string>

namespace qgen {

// Malformed or invariant-violating input data (corpus files, checkpoints, configs).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape mismatches, non-finite values and other numeric failures.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qgen
