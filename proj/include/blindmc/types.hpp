#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace blindmc {

using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Length-L complex sample vector (source, channel outputs, noise).
using ComplexSignal = Eigen::VectorXcd;

/// Inconsistent sizes between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a function (zero vector, nonpositive SNR).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent user input (non-Hermitian matrix, bad config).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to meet its accuracy contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file, with a 1-based location.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line, long column)
      : std::runtime_error(what + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  long line() const noexcept { return line_; }
  long column() const noexcept { return column_; }

 private:
  long line_;
  long column_;
};

}  // namespace blindmc
