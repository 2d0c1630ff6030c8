#ifndef KOOPGAL_ERROR_HPP
#define KOOPGAL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace koopgal {

/// Operands of different state dimension, or an index outside its range.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A structurally well-formed request that violates a documented limit or
/// precondition (order too large, non-positive half width, ...).
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Config document is missing a field or has one of the wrong type.
/// `path()` is a JSON pointer to the offending location.
class SchemaError : public std::runtime_error {
public:
  SchemaError(std::string path, const std::string &what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string &path() const noexcept { return path_; }

private:
  std::string path_;
};

/// Eigenvector matrix too ill-conditioned to trust a diagonalization.
class NearDefectiveError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// NaN/Inf or divergence during a numeric stage.
class NonFiniteError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// exp(Re(lambda) t) would overflow a double.
class OverflowError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace koopgal

#endif // KOOPGAL_ERROR_HPP
