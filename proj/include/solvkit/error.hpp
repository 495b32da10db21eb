#pragma once

#include <stdexcept>
#include <string>

namespace solvkit {

enum class ErrorKind {
  Domain,
  SingularPoint,
  Unsupported,
  NotExactlySolvable,
  ConstraintViolation,
  Positivity,
  Degeneracy,
  Underdetermined,
  NotRepresentable,
  SingularBracket,
  InconsistentConstraint,
  QesBroken,
  Regime,
  Precondition,
  BoundaryPropagation,
  Schema,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when H̃' fails to leave V_M invariant; carries the first offending
/// column and the size of the leaked coefficient.
class QesBrokenError : public Error {
 public:
  QesBrokenError(int column, int row, double residual, const std::string& what)
      : Error(ErrorKind::QesBroken, what), column_(column), row_(row), residual_(residual) {}

  int column() const noexcept { return column_; }
  int row() const noexcept { return row_; }
  double residual() const noexcept { return residual_; }

 private:
  int column_;
  int row_;
  double residual_;
};

}  // namespace solvkit
