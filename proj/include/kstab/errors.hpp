#ifndef KSTAB_ERRORS_HPP
#define KSTAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kstab {

/// Malformed or inconsistent input data (bad JSON, invalid polytope, bad parameters).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A computation could not proceed; carries the name of the failing operation.
class ComputeError : public std::runtime_error {
 public:
  ComputeError(const std::string& op, const std::string& msg)
      : std::runtime_error(op + ": " + msg), op_(op) {}
  const std::string& operation() const { return op_; }

 private:
  std::string op_;
};

class DegenerateGram : public ComputeError {
 public:
  explicit DegenerateGram(const std::string& op, const std::string& msg = "Gram matrix is singular")
      : ComputeError(op, msg) {}
};

class FitMismatch : public ComputeError {
 public:
  explicit FitMismatch(const std::string& msg)
      : ComputeError("ehrhart_fit", msg) {}
};

class NonConvergence : public ComputeError {
 public:
  explicit NonConvergence(const std::string& op, const std::string& msg)
      : ComputeError(op, msg) {}
};

class UnscaledConfig : public ComputeError {
 public:
  explicit UnscaledConfig(const std::string& op)
      : ComputeError(op, "test configuration must be passed through clear_denominators") {}
};

class PointBudgetExceeded : public ComputeError {
 public:
  PointBudgetExceeded(const std::string& op, const std::string& msg)
      : ComputeError(op, msg) {}
};

}  // namespace kstab

#endif
