#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace css {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using Support = std::vector<std::size_t>;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors caused by invalid domain input (bad polynomials, shapes, ratios).
/// The CLI maps these to exit code 2.
class DomainError : public Error {
 public:
  using Error::Error;
};

#define CSS_DEFINE_DOMAIN_ERROR(Name)    \
  class Name : public DomainError {      \
   public:                               \
    using DomainError::DomainError;      \
  }

CSS_DEFINE_DOMAIN_ERROR(NotMaximumLength);
CSS_DEFINE_DOMAIN_ERROR(InvalidPair);
CSS_DEFINE_DOMAIN_ERROR(InvalidPolynomial);
CSS_DEFINE_DOMAIN_ERROR(LengthMismatch);
CSS_DEFINE_DOMAIN_ERROR(DimensionMismatch);
CSS_DEFINE_DOMAIN_ERROR(InvalidRatio);
CSS_DEFINE_DOMAIN_ERROR(RankDeficient);
CSS_DEFINE_DOMAIN_ERROR(SingularSubproblem);
CSS_DEFINE_DOMAIN_ERROR(SupportOutOfRange);
CSS_DEFINE_DOMAIN_ERROR(RateMismatch);

#undef CSS_DEFINE_DOMAIN_ERROR

/// Configuration / usage problems. The CLI maps these to exit code 1.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = -1)
      : Error(line >= 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace css
