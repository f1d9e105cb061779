#ifndef GRIDREACH_ERRORS_HPP
#define GRIDREACH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gridreach {

// Base class for everything that should abort an analysis run (CLI exit 2).
class AnalysisError : public std::runtime_error {
 public:
  explicit AnalysisError(const std::string& msg) : std::runtime_error(msg) {}
};

// tan() was asked for an enclosure that straddles pi/2 + k*pi.  The caller
// must treat the enclosing analysis as failed; there is no finite enclosure.
class PoleCrossed : public AnalysisError {
 public:
  explicit PoleCrossed(const std::string& msg) : AnalysisError(msg) {}
};

// Exact star propagation exceeded its ReLU split budget.  Callers are
// expected to catch this and fall back to interval propagation.
class SplitBudgetExceeded : public AnalysisError {
 public:
  explicit SplitBudgetExceeded(const std::string& msg) : AnalysisError(msg) {}
};

// A point or region fell outside the grid domain where the operation
// requires it to be inside.
class OutOfDomain : public AnalysisError {
 public:
  explicit OutOfDomain(const std::string& msg) : AnalysisError(msg) {}
};

// Bad configuration or input file: carries a remediation hint where we can.
class ConfigError : public AnalysisError {
 public:
  explicit ConfigError(const std::string& msg) : AnalysisError(msg) {}
};

}  // namespace gridreach

#endif
