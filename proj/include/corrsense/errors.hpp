#pragma once

#include <stdexcept>

namespace corrsense {

/// An argument lies outside the domain of the quantity being computed.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A run configuration cannot produce a meaningful result.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical kernel (factorization, SVD, quadrature) failed.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A text file does not follow the expected layout.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace corrsense
