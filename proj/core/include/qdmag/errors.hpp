#pragma once

#include <stdexcept>
#include <string>

namespace qdmag {

// Argument errors use std::invalid_argument. The two types below mark
// failures that originate inside the library rather than in the caller.

/// A computed value broke one of its type invariants (signals a bug upstream).
class InvariantViolation : public std::logic_error {
 public:
  explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

/// A numerical routine produced a result outside its admissible range.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qdmag
