#include "css/pursuit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace css {

namespace {

using Stacked = Eigen::Matrix<double, Eigen::Dynamic, 2>;

Stacked stack(const ComplexVector& y) {
  Stacked s(y.size(), 2);
  s.col(0) = y.real();
  s.col(1) = y.imag();
  return s;
}

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

RealMatrix gather(const RealMatrix& a, const Support& cols) {
  RealMatrix out(a.rows(), idx(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(idx(k)) = a.col(idx(cols[k]));
  return out;
}

// Normalized correlation magnitude |a_j^T v| / ||a_j|| for two stacked columns.
// Without a structured adjoint this is v^T A on the single-precision copy: the
// product streams A once and is memory bound, and the scores only rank columns.
RealVector correlation_scores(const SensingMatrix& a, const Stacked& v) {
  if (a.adjoint()) {
    const RealMatrix c = a.adjoint()(v);
    return c.rowwise().norm().cwiseQuotient(a.column_norms());
  }
  const Eigen::MatrixXf vt = v.transpose().cast<float>();
  const Eigen::MatrixXf c = vt * a.single_precision();
  return c.cast<double>().colwise().norm().transpose().cwiseQuotient(a.column_norms());
}

Support merge(const Support& x, const Support& y) {
  Support out;
  out.reserve(x.size() + y.size());
  std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
  return out;
}

struct Iterate {
  Support support;
  Stacked residual;
  double residual_norm = 0.0;
};

}  // namespace

SensingMatrix::SensingMatrix(RealMatrix a, Adjoint adjoint) : a_(std::move(a)), adjoint_(std::move(adjoint)) {
  if (a_.size() == 0) throw DimensionMismatch("sensing matrix is empty");
  norms_ = a_.colwise().norm().transpose();
  if (!adjoint_) single_ = a_.cast<float>();
  for (Eigen::Index j = 0; j < norms_.size(); ++j) {
    if (!(norms_[j] > 0.0)) throw DimensionMismatch("sensing matrix column " + std::to_string(j) + " is zero");
  }
}

Support largest_indices(const RealVector& scores, std::size_t count) {
  const auto n = static_cast<std::size_t>(scores.size());
  count = std::min(count, n);
  Support order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto before = [&](std::size_t l, std::size_t r) {
    const double a = scores[idx(l)];
    const double b = scores[idx(r)];
    return a > b || (a == b && l < r);
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(), before);
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

LeastSquaresFit solve_least_squares(const RealMatrix& a, const RealMatrix& b, double condition_limit) {
  LeastSquaresFit fit;
  if (a.cols() <= a.rows()) {
    Eigen::ColPivHouseholderQR<RealMatrix> qr(a);
    const auto rank = static_cast<std::size_t>(qr.rank());
    if (rank == static_cast<std::size_t>(a.cols()) && rank > 0) {
      const auto& r = qr.matrixQR();
      const double cond = std::abs(r(0, 0)) / std::abs(r(idx(rank - 1), idx(rank - 1)));
      if (cond <= condition_limit) {
        fit.coefficients = qr.solve(b);
        fit.rank = rank;
        fit.full_column_rank = true;
        return fit;
      }
    }
  }
  if (a.cols() > a.rows()) {
    // Wide candidate sets (2S > M): minimum-norm solution from a rank-revealing
    // complete orthogonal decomposition, same result as the SVD at a fraction
    // of the cost.
    Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(a);
    cod.setThreshold(1.0 / condition_limit);
    fit.coefficients = cod.solve(b);
    fit.rank = static_cast<std::size_t>(cod.rank());
    fit.used_svd = true;
    fit.full_column_rank = false;
    return fit;
  }
  Eigen::BDCSVD<RealMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1.0 / condition_limit);
  fit.coefficients = svd.solve(b);
  fit.rank = static_cast<std::size_t>(svd.rank());
  fit.used_svd = true;
  fit.full_column_rank = fit.rank == static_cast<std::size_t>(a.cols());
  return fit;
}

PursuitResult subspace_pursuit(const SensingMatrix& a, const ComplexVector& y, std::size_t sparsity,
                               const PursuitOptions& options) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (static_cast<std::size_t>(y.size()) != m) {
    throw DimensionMismatch("y has length " + std::to_string(y.size()) + ", A has " + std::to_string(m) + " rows");
  }
  if (sparsity < 1 || sparsity > m || m > n) {
    throw DimensionMismatch("need 1 <= S <= M <= N, got S = " + std::to_string(sparsity) +
                            ", M = " + std::to_string(m) + ", N = " + std::to_string(n));
  }
  if (!y.allFinite()) throw DimensionMismatch("y contains non-finite values");

  const std::size_t cap = options.max_iterations ? options.max_iterations : std::max<std::size_t>(sparsity, 100);
  const RealMatrix& mat = a.matrix();
  const Stacked target = stack(y);

  // Fit y on an S-column support; returns coefficients and the residual.
  auto project = [&](const Support& support, RealMatrix* coefficients) {
    const RealMatrix sub = gather(mat, support);
    LeastSquaresFit fit = solve_least_squares(sub, target, options.svd_condition_limit);
    if (!fit.full_column_rank && !options.allow_rank_deficient) {
      throw SingularSubproblem("selected columns have rank " + std::to_string(fit.rank) + " < " +
                               std::to_string(support.size()));
    }
    Stacked residual = target - sub * fit.coefficients;
    if (coefficients) *coefficients = std::move(fit.coefficients);
    return residual;
  };

  Iterate current;
  current.support = largest_indices(correlation_scores(a, target), sparsity);
  if (options.pseudo_inverse_init) {
    current.residual = project(current.support, nullptr);
  } else {
    RealMatrix sub = gather(mat, current.support);
    for (std::size_t k = 0; k < current.support.size(); ++k) {
      sub.col(idx(k)) /= a.column_norms()[idx(current.support[k])];
    }
    current.residual = target - sub * (sub.transpose() * target);
  }
  current.residual_norm = current.residual.norm();

  PursuitResult result;
  result.residual_norms.push_back(current.residual_norm);

  std::size_t iteration = 0;
  while (true) {
    if (iteration == cap) {
      result.hit_iteration_cap = true;
      break;
    }
    ++iteration;

    const Support fresh = largest_indices(correlation_scores(a, current.residual), sparsity);
    const Support candidates = merge(current.support, fresh);
    const RealMatrix cand_cols = gather(mat, candidates);
    const LeastSquaresFit wide = solve_least_squares(cand_cols, target, options.svd_condition_limit);

    RealVector magnitude(idx(candidates.size()));
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      magnitude[idx(k)] = wide.coefficients.row(idx(k)).norm() * a.column_norms()[idx(candidates[k])];
    }
    Support next;
    for (std::size_t k : largest_indices(magnitude, sparsity)) next.push_back(candidates[k]);

    Iterate trial;
    trial.support = std::move(next);
    trial.residual = project(trial.support, nullptr);
    trial.residual_norm = trial.residual.norm();

    if (!(trial.residual_norm < current.residual_norm)) break;
    current = std::move(trial);
    result.residual_norms.push_back(current.residual_norm);
  }
  result.iterations = iteration;

  RealMatrix coefficients;
  project(current.support, &coefficients);
  result.alpha_hat = ComplexVector::Zero(idx(n));
  for (std::size_t k = 0; k < current.support.size(); ++k) {
    result.alpha_hat[idx(current.support[k])] = Complex(coefficients(idx(k), 0), coefficients(idx(k), 1));
  }
  result.support = std::move(current.support);
  return result;
}

PursuitResult subspace_pursuit(const RealMatrix& a, const ComplexVector& y, std::size_t sparsity,
                               const PursuitOptions& options) {
  return subspace_pursuit(SensingMatrix(a), y, sparsity, options);
}

std::uint64_t least_squares_cost(std::uint64_t observations, std::uint64_t unknowns) {
  return 2 * observations * unknowns * unknowns + 11 * unknowns * unknowns * unknowns;
}

CostBreakdown predicted_cost(const ComplexityModel& model) {
  const std::uint64_t k = model.iterations;
  const std::uint64_t s = model.sparsity;
  const std::uint64_t m = model.rows;
  const std::uint64_t n = model.cols;

  CostBreakdown c;
  c.init_correlation = 4 * m * n;
  c.init_residual = 2 * m + 8 * m * s;
  c.loop_correlation = 4 * k * m * n;
  c.loop_candidate_ls = k * least_squares_cost(m, 2 * s);
  c.loop_projection = k * (2 * m + 4 * m * s + least_squares_cost(m, s));
  c.line_item_sum =
      c.init_correlation + c.init_residual + c.loop_correlation + c.loop_candidate_ls + c.loop_projection;
  c.closed_form_total = 99 * k * s * s * s + 4 * (k + 1) * m * n + 2 * (k + 1) * m + 4 * (k + 2) * m * s +
                        10 * m * k * s * s;
  c.overhead = model.overhead_per_iteration * static_cast<double>(k);
  c.total_with_overhead = static_cast<double>(c.closed_form_total) + c.overhead;
  return c;
}

}  // namespace css
