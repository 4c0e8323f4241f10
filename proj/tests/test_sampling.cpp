#include <doctest.h>

#include <sstream>

#include "css/sampling.hpp"

using namespace css;

namespace {

// Reference accumulate-and-dump matrix from the boundary definition
// b_r = round(r n / m), written out with floating point rounding.
RealMatrix naive_h(std::size_t n, std::size_t m) {
  RealMatrix h = RealMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < m; ++r) {
    const auto lo = static_cast<std::size_t>(std::floor(static_cast<double>(r * n) / m + 0.5));
    const auto hi = static_cast<std::size_t>(std::floor(static_cast<double>((r + 1) * n) / m + 0.5));
    for (std::size_t c = lo; c < hi; ++c) h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 1.0;
  }
  return h;
}

ComplexVector random_complex(std::size_t n, Rng& rng) {
  ComplexVector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = Complex(rng.normal(), rng.normal());
  return v;
}

ComplexVector naive_apply(const RealMatrix& a, const ComplexVector& x) {
  ComplexVector y = ComplexVector::Zero(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  }
  return y;
}

}  // namespace

TEST_CASE("measurement count rounds half up") {
  CHECK(measurement_count(1023, 1) == 1023);
  CHECK(measurement_count(1023, 2) == 512);
  CHECK(measurement_count(1023, 4) == 256);
  CHECK(measurement_count(31, 2) == 16);
  CHECK(measurement_count(127, 2) == 64);
  CHECK(measurement_count(10, 4) == 3);  // 2.5 -> 3
  CHECK_THROWS_AS(measurement_count(10, 0), InvalidRatio);
  CHECK_THROWS_AS(measurement_count(10, 11), InvalidRatio);
}

TEST_CASE("block boundaries partition the columns") {
  for (std::size_t n : {7u, 31u, 127u, 1023u}) {
    for (std::size_t m = 1; m <= n; m += (n / 7) + 1) {
      const auto b = block_boundaries(n, m);
      REQUIRE(b.size() == m + 1);
      CHECK(b.front() == 0);
      CHECK(b.back() == n);
      for (std::size_t r = 0; r < m; ++r) CHECK(b[r + 1] > b[r]);
    }
  }
}

TEST_CASE("structured operators match naive dense products") {
  Rng rng(7);
  for (std::size_t n : {31u, 127u}) {
    for (std::size_t kappa : {1u, 2u, 3u, 4u}) {
      const std::size_t m = measurement_count(n, kappa);
      const RealMatrix h = naive_h(n, m);
      const ComplexVector x = random_complex(n, rng);

      const auto css = MeasurementOperator::css(n, kappa);
      CHECK(css.rows() == m);
      CHECK((css.dense() - h).norm() == 0.0);
      CHECK((css.apply(x) - naive_apply(h, x)).norm() < 1e-12 * x.norm());

      Rng op_rng(kappa * 100 + n);
      const auto rd = build_operator(OperatorKind::random_demodulator, n, kappa, op_rng);
      RealMatrix d = RealMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        const double c = rd.chipping()[i];
        CHECK(std::abs(c) == 1.0);
        d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = c;
      }
      const RealMatrix hd = h * d;
      CHECK((rd.dense() - hd).norm() == 0.0);
      CHECK((rd.apply(x) - naive_apply(hd, x)).norm() < 1e-12 * x.norm());
      const RealMatrix psi = RealMatrix::NullaryExpr(static_cast<Eigen::Index>(n), 5, [&](Eigen::Index, Eigen::Index) {
        return rng.sign();
      });
      CHECK((rd.apply(psi) - hd * psi).norm() < 1e-12);
    }
  }
}

TEST_CASE("transpose application matches the dense transpose") {
  Rng rng(21);
  for (auto kind : {OperatorKind::identity, OperatorKind::css, OperatorKind::random_demodulator,
                    OperatorKind::rademacher}) {
    const auto op = build_operator(kind, 127, kind == OperatorKind::identity ? 1 : 3, rng);
    const RealMatrix v = RealMatrix::Random(static_cast<Eigen::Index>(op.rows()), 2);
    CHECK((op.apply_transpose(v) - op.dense().transpose() * v).norm() < 1e-12);
  }
  CHECK_THROWS_AS(MeasurementOperator::css(31, 2).apply_transpose(RealMatrix::Zero(5, 1)), DimensionMismatch);
}

TEST_CASE("identity and explicit-row factories") {
  Rng rng(3);
  const auto id = MeasurementOperator::identity(31);
  const ComplexVector x = random_complex(31, rng);
  CHECK((id.apply(x) - x).norm() == 0.0);
  const auto rows = MeasurementOperator::css_rows(1023, 300);
  CHECK(rows.rows() == 300);
  CHECK(rows.kappa() == 3);
  CHECK((rows.dense() - naive_h(1023, 300)).norm() == 0.0);
  const auto rad = build_operator_rows(OperatorKind::rademacher, 64, 20, rng);
  CHECK(rad.rows() == 20);
  CHECK((rad.dense().array().abs() == 1.0).all());
}

TEST_CASE("only Rademacher operators get a prewhitener") {
  Rng rng(11);
  CHECK_FALSE(build_prewhitener(MeasurementOperator::css(31, 2)));
  CHECK_FALSE(build_prewhitener(build_operator(OperatorKind::random_demodulator, 31, 2, rng)));
  const auto rad = build_operator(OperatorKind::rademacher, 31, 2, rng);
  const auto p = build_prewhitener(rad);
  REQUIRE(p);
  const RealMatrix theta = rad.dense();
  const RealMatrix pt = p->apply(theta);
  const RealMatrix gram = pt * pt.transpose();
  CHECK((gram - RealMatrix::Identity(gram.rows(), gram.cols())).norm() < 1e-9);
  CHECK((p->matrix() * theta - pt).norm() < 1e-9);
}

TEST_CASE("rank-deficient Rademacher matrix is rejected") {
  RealMatrix e = RealMatrix::Ones(3, 8);
  CHECK_THROWS_AS(build_prewhitener(MeasurementOperator::rademacher(e, 3)), RankDeficient);
}

TEST_CASE("prewhitened noise covariance is sigma^2 I within 5%") {
  Rng rng(2024);
  const std::size_t n = 63, trials = 40000;
  const auto rad = build_operator(OperatorKind::rademacher, n, 4, rng);
  const auto p = *build_prewhitener(rad);
  const double sigma2 = 0.7;
  const auto m = static_cast<Eigen::Index>(rad.rows());
  RealMatrix cov = RealMatrix::Zero(m, m);
  for (std::size_t t = 0; t < trials; ++t) {
    ComplexVector w(static_cast<Eigen::Index>(n));
    for (auto& v : w) v = std::sqrt(sigma2 / 2.0) * Complex(rng.normal(), rng.normal());
    const ComplexVector z = p.apply(rad.apply(w));
    cov += (z * z.adjoint()).real();
  }
  cov /= static_cast<double>(trials);
  const RealMatrix target = sigma2 * RealMatrix::Identity(m, m);
  const double rel = (cov - target).norm() / target.norm();
  CHECK(rel < 0.05);
  for (Eigen::Index i = 0; i < m; ++i) CHECK(std::abs(cov(i, i) / sigma2 - 1.0) < 0.05);
}

TEST_CASE("operator CSV dump") {
  std::ostringstream s;
  write_operator_csv(MeasurementOperator::css(4, 2), s);
  CHECK(s.str() == "1,1,0,0\n0,0,1,1\n");
}

TEST_CASE("operator names parse") {
  CHECK(parse_operator_kind("rd") == OperatorKind::random_demodulator);
  CHECK(parse_operator_kind("random_demodulator") == OperatorKind::random_demodulator);
  CHECK(to_string(OperatorKind::css) == "css");
  CHECK_THROWS(parse_operator_kind("bogus"));
}
