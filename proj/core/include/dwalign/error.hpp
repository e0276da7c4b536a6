#pragma once

#include <stdexcept>
#include <string>

namespace dwalign {

// Malformed input data or files. The CLI maps this to exit code 2.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf detected during training or scoring. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violations (bad positions, mismatched shapes, etc.) are
// reported as std::invalid_argument / std::out_of_range.

}  // namespace dwalign
