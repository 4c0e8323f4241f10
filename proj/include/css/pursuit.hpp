#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "css/types.hpp"

namespace css {

/// A = P Theta Psi together with its column norms.
///
/// Pursuit ranks columns by normalized correlation |a_j^T v| / ||a_j|| and
/// the transpose initialization uses the normalized columns, so A can be
/// passed unscaled. Correlations for ranking come from the supplied adjoint
/// or, without one, from a single-precision product; every fit is in double. Throws DimensionMismatch on an empty matrix or a zero
/// column.
class SensingMatrix {
 public:
  /// Computes A^T V for an M x 2 matrix V; must agree with matrix().
  using Adjoint = std::function<RealMatrix(const RealMatrix&)>;

  explicit SensingMatrix(RealMatrix a, Adjoint adjoint = {});

  const RealMatrix& matrix() const noexcept { return a_; }
  const RealVector& column_norms() const noexcept { return norms_; }
  /// Float copy of A used for the correlation scores when no structured
  /// adjoint is supplied.
  const Eigen::MatrixXf& single_precision() const noexcept { return single_; }
  const Adjoint& adjoint() const noexcept { return adjoint_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(a_.cols()); }

 private:
  RealMatrix a_;
  RealVector norms_;
  Eigen::MatrixXf single_;
  Adjoint adjoint_;
};

struct PursuitOptions {
  /// 0 selects max(S, 100).
  std::size_t max_iterations = 0;
  /// Initial residual from the least-squares projection instead of A_T A_T^T y.
  bool pseudo_inverse_init = false;
  /// Pivoted-QR condition estimate above which the SVD path is taken.
  double svd_condition_limit = 1e12;
  /// When false, a rank-deficient S-column fit raises SingularSubproblem.
  /// When true the minimum-norm fit is used instead.
  bool allow_rank_deficient = false;
};

struct PursuitResult {
  ComplexVector alpha_hat;
  /// Ascending, |support| = S.
  Support support;
  /// Loop iterations executed, including the one that triggered the stop.
  std::size_t iterations = 0;
  /// ||y_r^l||_2 for l = 0 .. returned iterate; strictly decreasing.
  std::vector<double> residual_norms;
  bool hit_iteration_cap = false;
};

/// Subspace Pursuit for real A and complex y.
///
/// T^0 holds the S largest normalized correlations |A^T y|. Each iteration
/// merges T^{l-1} with the S largest correlations against the previous
/// residual, fits y on the merged set, keeps the S largest fitted
/// coefficients and projects y off them. The loop stops at the first
/// iteration whose residual norm does not fall below the previous one (that
/// iterate is discarded) or at the iteration cap. Real and imaginary parts
/// share the support and are solved together as one two-column least-squares
/// problem. Ties are broken by ascending column index.
PursuitResult subspace_pursuit(const SensingMatrix& a, const ComplexVector& y, std::size_t sparsity,
                               const PursuitOptions& options = {});

PursuitResult subspace_pursuit(const RealMatrix& a, const ComplexVector& y, std::size_t sparsity,
                               const PursuitOptions& options = {});

struct LeastSquaresFit {
  RealMatrix coefficients;
  std::size_t rank = 0;
  /// True when the fit did not come from the pivoted QR path.
  bool used_svd = false;
  bool full_column_rank = false;
};

/// Minimizes ||A X - B||_F. Column-pivoted QR when A has full column rank and
/// a condition estimate below `condition_limit`; otherwise the minimum-norm
/// solution from an SVD with singular values below sigma_max / condition_limit
/// discarded. Wide systems (more columns than rows) use a complete orthogonal
/// decomposition for the same minimum-norm solution.
LeastSquaresFit solve_least_squares(const RealMatrix& a, const RealMatrix& b, double condition_limit = 1e12);

/// Indices of the `count` largest entries, ties broken by ascending index;
/// returned in ascending index order.
Support largest_indices(const RealVector& scores, std::size_t count);

/// Operation-count model of one Subspace Pursuit run.
struct ComplexityModel {
  std::uint64_t iterations = 0;
  std::uint64_t sparsity = 0;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  /// Per-iteration overhead constant c.
  double overhead_per_iteration = 3e9;
};

struct CostBreakdown {
  std::uint64_t init_correlation = 0;   // 4MN
  std::uint64_t init_residual = 0;      // 2M + 8MS
  std::uint64_t loop_correlation = 0;   // 4KMN
  std::uint64_t loop_candidate_ls = 0;  // K (2M(2S)^2 + 11(2S)^3)
  std::uint64_t loop_projection = 0;    // K (2M + 4MS + 2MS^2 + 11S^3)
  std::uint64_t line_item_sum = 0;
  std::uint64_t closed_form_total = 0;
  double overhead = 0.0;                // cK
  double total_with_overhead = 0.0;
};

/// 2MS^2 + 11S^3: SVD least squares with S unknowns and M observations.
std::uint64_t least_squares_cost(std::uint64_t observations, std::uint64_t unknowns);

CostBreakdown predicted_cost(const ComplexityModel& model);

}  // namespace css
