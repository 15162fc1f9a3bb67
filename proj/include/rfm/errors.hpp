#pragma once

#include <stdexcept>

namespace rfm {

/// Matrix assembly could not proceed (repeated frequencies, empty patch).
class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation not defined for this kind of input, e.g. block extraction on a plain matrix.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// NaN or Inf produced somewhere in a pipeline.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rfm
