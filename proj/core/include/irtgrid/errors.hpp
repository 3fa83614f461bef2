#pragma once

#include <stdexcept>
#include <string>

namespace irtgrid {

/// Input text could not be parsed (bad record, malformed CSV/JSON).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs parsed but violate an operation's preconditions
/// (empty after filtering, fewer items than bins, no overlap, ...).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure during optimization (divergence, non-finite values).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace irtgrid
