#pragma once

#include <stdexcept>
#include <string>

namespace hermein {

/// Requested bundle has a summand with negative twisted degree (no global
/// sections generate it), so section-space constructions are undefined.
class unsupported_bundle_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Quadrature rule cannot integrate the section monomials of the bundle.
class insufficient_quadrature_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix that must be Hermitian positive-definite failed factorization.
class conditioning_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Evaluation map is rank-deficient at the requested point.
class base_point_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An evaluation produced a non-finite value.
class numeric_domain_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Fixed-point iteration left the basin (residual blew up).
class divergence_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Line search could not find a decreasing step.
class stall_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A library invariant was violated at runtime; carries the invariant name.
class invariant_violation : public std::runtime_error {
public:
  invariant_violation(const std::string& invariant, const std::string& detail)
      : std::runtime_error(invariant + ": " + detail), invariant_(invariant) {}
  const std::string& invariant() const { return invariant_; }

private:
  std::string invariant_;
};

class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Config file could not be parsed; carries line and column.
class parse_error : public std::runtime_error {
public:
  parse_error(int line, int column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + what),
        line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

} // namespace hermein
