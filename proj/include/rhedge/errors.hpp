#pragma once

#include <stdexcept>
#include <string>

namespace rhedge {

// Model/input problems: schema violations, invariant failures. CLI exit 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Solver failed to reach a contracted tolerance. CLI exit 3.
class ToleranceError : public std::runtime_error {
 public:
  explicit ToleranceError(const std::string& what) : std::runtime_error(what) {}
};

// One-period arbitrage detected mid-computation. CLI exit 4.
class ArbitrageError : public std::runtime_error {
 public:
  explicit ArbitrageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rhedge
