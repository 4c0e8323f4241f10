#include <doctest.h>

#include <algorithm>
#include <limits>

#include "css/gold.hpp"
#include "css/pursuit.hpp"
#include "css/rng.hpp"
#include "css/sampling.hpp"

using namespace css;

namespace {

RealMatrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  return RealMatrix::NullaryExpr(rows, cols, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
}

ComplexVector sparse_y(const RealMatrix& a, const Support& s, Rng& rng, ComplexVector* alpha = nullptr) {
  ComplexVector x = ComplexVector::Zero(a.cols());
  for (auto i : s) x[static_cast<Eigen::Index>(i)] = Complex(rng.normal() + (rng.sign()), rng.normal());
  if (alpha) *alpha = x;
  return a.cast<Complex>() * x;
}

double residual_on(const RealMatrix& a, const ComplexVector& y, const Support& s) {
  RealMatrix sub(a.rows(), static_cast<Eigen::Index>(s.size()));
  for (std::size_t k = 0; k < s.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(static_cast<Eigen::Index>(s[k]));
  RealMatrix rhs(y.size(), 2);
  rhs.col(0) = y.real();
  rhs.col(1) = y.imag();
  const RealMatrix coef = sub.colPivHouseholderQr().solve(rhs);
  return (sub * coef - rhs).norm();
}

}  // namespace

TEST_CASE("largest_indices breaks ties by ascending index") {
  RealVector v(6);
  v << 1, 3, 3, 0, 3, 2;
  CHECK(largest_indices(v, 2) == Support{1, 2});
  CHECK(largest_indices(v, 4) == Support{1, 2, 4, 5});
}

TEST_CASE("least squares paths agree") {
  Rng rng(1);
  const RealMatrix a = gaussian(12, 4, rng);
  const RealMatrix b = gaussian(12, 2, rng);
  const auto fit = solve_least_squares(a, b);
  CHECK_FALSE(fit.used_svd);
  CHECK(fit.full_column_rank);
  const RealMatrix normal = (a.transpose() * a).ldlt().solve(a.transpose() * b);
  CHECK((fit.coefficients - normal).norm() < 1e-10);

  RealMatrix dup(12, 3);
  dup << a.col(0), a.col(1), a.col(0);
  const auto def = solve_least_squares(dup, b);
  CHECK(def.used_svd);
  CHECK(def.rank == 2);
  CHECK_FALSE(def.full_column_rank);
  // Minimum norm: duplicated columns share the weight equally.
  CHECK(def.coefficients(0, 0) == doctest::Approx(def.coefficients(2, 0)));

  const RealMatrix wide = gaussian(3, 5, rng);
  const auto w = solve_least_squares(wide, gaussian(3, 1, rng));
  CHECK(w.used_svd);
  CHECK(w.rank == 3);
  const Eigen::BDCSVD<RealMatrix> svd(wide, Eigen::ComputeThinU | Eigen::ComputeThinV);
  CHECK((w.coefficients - svd.solve(wide * w.coefficients)).norm() < 1e-10);
}

TEST_CASE("noiseless recovery over every support of C(8,2)") {
  Rng rng(42);
  const RealMatrix a = gaussian(8, 8, rng);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = i + 1; j < 8; ++j) {
      ComplexVector alpha;
      const ComplexVector y = sparse_y(a, {i, j}, rng, &alpha);
      const auto r = subspace_pursuit(a, y, 2);
      CHECK(r.support == Support{i, j});
      CHECK((r.alpha_hat - alpha).norm() < 1e-9 * alpha.norm());
      ++checked;
    }
  }
  CHECK(checked == 28);
}

TEST_CASE("noisy result is never better than the exhaustive optimum") {
  Rng rng(8);
  const RealMatrix a = gaussian(6, 8, rng);
  for (int trial = 0; trial < 30; ++trial) {
    ComplexVector y = sparse_y(a, Support{static_cast<std::size_t>(trial % 4), static_cast<std::size_t>(4 + trial % 4)}, rng);
    for (auto& v : y) v += 0.3 * Complex(rng.normal(), rng.normal());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t j = i + 1; j < 8; ++j) best = std::min(best, residual_on(a, y, {i, j}));
    }
    const auto r = subspace_pursuit(a, y, 2, PursuitOptions{0, true, 1e12, false});
    CHECK(r.residual_norms.back() >= best - 1e-9);
    CHECK(r.residual_norms.back() == doctest::Approx(residual_on(a, y, r.support)).epsilon(1e-9));
    CHECK(residual_on(a, y, subspace_pursuit(a, y, 2).support) >= best - 1e-9);
  }
}

TEST_CASE("residual is strictly decreasing and orthogonal to the support") {
  const auto d = build_gold_dictionary(7);
  Rng rng(3);
  for (std::size_t kappa : {1u, 2u, 4u}) {
    const RealMatrix a = MeasurementOperator::css(127, kappa).apply(d.psi);
    const SensingMatrix sm(a);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t s = 2 + static_cast<std::size_t>(trial % 8);
      Support sup;
      while (sup.size() < s) {
        const auto i = rng.below(127);
        if (std::find(sup.begin(), sup.end(), i) == sup.end()) sup.push_back(i);
      }
      std::sort(sup.begin(), sup.end());
      ComplexVector y = sparse_y(a, sup, rng);
      for (auto& v : y) v += 0.5 * Complex(rng.normal(), rng.normal());
      const auto r = subspace_pursuit(sm, y, s);
      REQUIRE(r.support.size() == s);
      CHECK(std::is_sorted(r.support.begin(), r.support.end()));
      for (std::size_t l = 1; l < r.residual_norms.size(); ++l) {
        CHECK(r.residual_norms[l] < r.residual_norms[l - 1]);
      }
      CHECK(r.iterations >= r.residual_norms.size() - 1);
      const ComplexVector res = y - a.cast<Complex>() * r.alpha_hat;
      CHECK(res.norm() == doctest::Approx(r.residual_norms.back()).epsilon(1e-9));
      for (auto j : r.support) {
        const Complex c = a.col(static_cast<Eigen::Index>(j)).cast<Complex>().dot(res);
        CHECK(std::abs(c) < 1e-8 * y.norm() * a.col(static_cast<Eigen::Index>(j)).norm());
      }
      for (Eigen::Index j = 0; j < r.alpha_hat.size(); ++j) {
        if (std::find(r.support.begin(), r.support.end(), static_cast<std::size_t>(j)) == r.support.end()) {
          CHECK(r.alpha_hat[j] == Complex(0.0));
        }
      }
    }
  }
}

TEST_CASE("column scaling does not change the support") {
  Rng rng(12);
  const RealMatrix a = gaussian(20, 40, rng);
  RealMatrix scaled = a;
  for (Eigen::Index j = 0; j < a.cols(); ++j) scaled.col(j) *= 0.1 + 3.0 * rng.uniform();
  for (int t = 0; t < 10; ++t) {
    ComplexVector y = sparse_y(a, {3, 17, 29}, rng);
    for (auto& v : y) v += 0.05 * Complex(rng.normal(), rng.normal());
    CHECK(subspace_pursuit(a, y, 3).support == subspace_pursuit(scaled, y, 3).support);
  }
}

TEST_CASE("structured adjoint gives the same decisions as the dense path") {
  const auto d = build_gold_dictionary(7);
  const GoldCorrelator corr(d);
  const auto op = MeasurementOperator::css(127, 2);
  const RealMatrix a = op.apply(d.psi);
  const SensingMatrix dense(a);
  const SensingMatrix fast(a, [&](const RealMatrix& v) { return corr.adjoint(op.apply_transpose(v)); });
  Rng rng(31);
  for (int t = 0; t < 40; ++t) {
    ComplexVector alpha;
    const Support sup{static_cast<std::size_t>(t), static_cast<std::size_t>(50 + t), 120};
    ComplexVector y = sparse_y(a, sup, rng, &alpha);
    for (auto& v : y) v += 0.2 * Complex(rng.normal(), rng.normal());
    const auto r1 = subspace_pursuit(dense, y, 3);
    const auto r2 = subspace_pursuit(fast, y, 3);
    CHECK(r1.support == r2.support);
    CHECK((r1.alpha_hat - r2.alpha_hat).norm() < 1e-9);
  }
}

TEST_CASE("input validation") {
  Rng rng(2);
  const RealMatrix a = gaussian(5, 10, rng);
  CHECK_THROWS_AS(subspace_pursuit(a, ComplexVector::Zero(4), 2), DimensionMismatch);
  CHECK_THROWS_AS(subspace_pursuit(a, ComplexVector::Zero(5), 0), DimensionMismatch);
  RealMatrix z = a;
  z.col(3).setZero();
  CHECK_THROWS_AS(SensingMatrix{z}, DimensionMismatch);
  RealMatrix dup = gaussian(4, 6, rng);
  dup.col(1) = dup.col(0);
  const ComplexVector y = dup.col(0).cast<Complex>();
  CHECK_THROWS_AS(subspace_pursuit(dup, y, 2), SingularSubproblem);
  CHECK_NOTHROW(subspace_pursuit(dup, y, 2, PursuitOptions{0, false, 1e12, true}));
}

TEST_CASE("iteration cap") {
  Rng rng(4);
  const RealMatrix a = gaussian(30, 60, rng);
  ComplexVector y(30);
  for (auto& v : y) v = Complex(rng.normal(), rng.normal());
  const auto r = subspace_pursuit(a, y, 5, PursuitOptions{1, false, 1e12, false});
  CHECK(r.iterations <= 1);
}

TEST_CASE("cost line items sum to the closed form") {
  // Independent evaluation in long double of
  // 99KS^3 + 4(K+1)MN + 2(K+1)M + 4(K+2)MS + 10MKS^2.
  Rng rng(1000);
  for (int t = 0; t < 1000; ++t) {
    ComplexityModel m;
    m.iterations = 1 + rng.below(200);
    m.sparsity = 1 + rng.below(300);
    m.rows = 1 + rng.below(1023);
    m.cols = m.rows + rng.below(1024);
    const auto c = predicted_cost(m);
    CHECK(c.line_item_sum == c.closed_form_total);
    const std::uint64_t k = m.iterations, s = m.sparsity, mm = m.rows, n = m.cols;
    const std::uint64_t closed = 99 * k * s * s * s + 4 * (k + 1) * mm * n + 2 * (k + 1) * mm + 4 * (k + 2) * mm * s +
                                 10 * mm * k * s * s;
    CHECK(c.closed_form_total == closed);
    CHECK(c.init_correlation + c.init_residual + c.loop_correlation + c.loop_candidate_ls + c.loop_projection ==
          c.line_item_sum);
    CHECK(c.overhead == doctest::Approx(3e9 * static_cast<double>(k)));
  }
  CHECK(least_squares_cost(10, 3) == 2 * 10 * 9 + 11 * 27);
}
