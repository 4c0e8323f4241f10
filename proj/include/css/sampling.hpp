#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "css/rng.hpp"
#include "css/types.hpp"

namespace css {

enum class OperatorKind { identity, rademacher, random_demodulator, css };

std::string_view to_string(OperatorKind kind);
/// Accepts "identity", "rademacher", "rd", "random_demodulator", "css".
OperatorKind parse_operator_kind(std::string_view text);

/// M = round(n / kappa), halves rounded up. Throws InvalidRatio for kappa < 1,
/// kappa > n or M = 0.
std::size_t measurement_count(std::size_t n, std::size_t kappa);

/// Row r of an accumulate-and-dump matrix covers columns [b_r, b_{r+1}) with
/// b_r = round(r * n / m). Returns the m + 1 boundaries.
std::vector<std::size_t> block_boundaries(std::size_t n, std::size_t m);

/// Real M x N measurement matrix. Identity, CSS (H) and RD (H D) are stored by
/// structure; only Rademacher keeps a dense matrix.
class MeasurementOperator {
 public:
  static MeasurementOperator identity(std::size_t n);
  static MeasurementOperator css(std::size_t n, std::size_t kappa);
  static MeasurementOperator random_demodulator(std::size_t n, std::size_t kappa, std::vector<double> chipping);
  static MeasurementOperator rademacher(RealMatrix entries, std::size_t kappa);

  /// Explicit row count m instead of a ratio; kappa() reports round(n / m).
  /// Phase-transition grids need M values that no integer ratio produces.
  static MeasurementOperator css_rows(std::size_t n, std::size_t m);
  static MeasurementOperator random_demodulator_rows(std::size_t n, std::size_t m, std::vector<double> chipping);
  static MeasurementOperator rademacher_rows(RealMatrix entries);

  OperatorKind kind() const noexcept { return kind_; }
  std::size_t cols() const noexcept { return n_; }
  std::size_t rows() const noexcept { return m_; }
  std::size_t kappa() const noexcept { return kappa_; }
  const std::vector<double>& chipping() const noexcept { return chipping_; }
  const std::vector<std::size_t>& boundaries() const noexcept { return bounds_; }

  /// y = Theta x, real and imaginary parts independently.
  ComplexVector apply(const ComplexVector& x) const;
  /// Theta X for a real N x k matrix; used to form A = Theta Psi.
  RealMatrix apply(const RealMatrix& x) const;
  /// Theta^T V for a real M x k matrix.
  RealMatrix apply_transpose(const RealMatrix& v) const;
  /// Materialized Theta.
  RealMatrix dense() const;

 private:
  MeasurementOperator() = default;
  friend MeasurementOperator build_operator(OperatorKind, std::size_t, std::size_t, Rng&);

  OperatorKind kind_ = OperatorKind::identity;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::size_t kappa_ = 1;
  std::vector<double> chipping_;
  std::vector<std::size_t> bounds_;
  RealMatrix dense_;
};

/// Draws chipping / Rademacher entries from `rng` where the kind needs them.
MeasurementOperator build_operator(OperatorKind kind, std::size_t n, std::size_t kappa, Rng& rng);
MeasurementOperator build_operator_rows(OperatorKind kind, std::size_t n, std::size_t m, Rng& rng);

/// Noise whitening for operators with non-orthogonal rows: P = C^{-1} with
/// C C^T = Theta Theta^T. Applied by triangular solves with C.
class Prewhitener {
 public:
  explicit Prewhitener(RealMatrix lower) : lower_(std::move(lower)) {}

  ComplexVector apply(const ComplexVector& y) const;
  RealMatrix apply(const RealMatrix& a) const;
  /// Explicit P; for tests and diagnostics.
  RealMatrix matrix() const;
  const RealMatrix& cholesky_factor() const noexcept { return lower_; }

 private:
  RealMatrix lower_;
};

/// Rademacher operators get a prewhitener; identity, RD and CSS have
/// orthogonal rows and return nullopt. Throws RankDeficient when Theta Theta^T
/// is not positive definite.
std::optional<Prewhitener> build_prewhitener(const MeasurementOperator& op);

/// Dense dump, one matrix row per line.
void write_operator_csv(const MeasurementOperator& op, std::ostream& out);

}  // namespace css
