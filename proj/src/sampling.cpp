#include "css/sampling.hpp"

#include <ostream>
#include <string>

namespace css {

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::identity:
      return "identity";
    case OperatorKind::rademacher:
      return "rademacher";
    case OperatorKind::random_demodulator:
      return "rd";
    case OperatorKind::css:
      return "css";
  }
  return "?";
}

OperatorKind parse_operator_kind(std::string_view text) {
  if (text == "identity" || text == "classic") return OperatorKind::identity;
  if (text == "rademacher") return OperatorKind::rademacher;
  if (text == "rd" || text == "random_demodulator") return OperatorKind::random_demodulator;
  if (text == "css") return OperatorKind::css;
  throw ConfigError("unknown operator kind '" + std::string(text) + "'");
}

std::size_t measurement_count(std::size_t n, std::size_t kappa) {
  if (kappa < 1 || kappa > n) {
    throw InvalidRatio("subsampling ratio " + std::to_string(kappa) + " invalid for n = " + std::to_string(n));
  }
  const std::size_t m = (2 * n + kappa) / (2 * kappa);
  if (m == 0) throw InvalidRatio("no measurements for n = " + std::to_string(n));
  return m;
}

std::vector<std::size_t> block_boundaries(std::size_t n, std::size_t m) {
  std::vector<std::size_t> b(m + 1);
  for (std::size_t r = 0; r <= m; ++r) b[r] = (2 * r * n + m) / (2 * m);
  return b;
}

MeasurementOperator MeasurementOperator::identity(std::size_t n) {
  if (n == 0) throw InvalidRatio("identity operator needs n > 0");
  MeasurementOperator op;
  op.kind_ = OperatorKind::identity;
  op.n_ = op.m_ = n;
  op.kappa_ = 1;
  return op;
}

MeasurementOperator MeasurementOperator::css(std::size_t n, std::size_t kappa) {
  MeasurementOperator op = css_rows(n, measurement_count(n, kappa));
  op.kappa_ = kappa;
  return op;
}

MeasurementOperator MeasurementOperator::css_rows(std::size_t n, std::size_t m) {
  if (m < 1 || m > n) {
    throw InvalidRatio("row count " + std::to_string(m) + " invalid for n = " + std::to_string(n));
  }
  MeasurementOperator op;
  op.kind_ = OperatorKind::css;
  op.n_ = n;
  op.m_ = m;
  op.kappa_ = (2 * n + m) / (2 * m);
  op.bounds_ = block_boundaries(n, m);
  return op;
}

MeasurementOperator MeasurementOperator::random_demodulator(std::size_t n, std::size_t kappa,
                                                            std::vector<double> chipping) {
  MeasurementOperator op = random_demodulator_rows(n, measurement_count(n, kappa), std::move(chipping));
  op.kappa_ = kappa;
  return op;
}

MeasurementOperator MeasurementOperator::random_demodulator_rows(std::size_t n, std::size_t m,
                                                                 std::vector<double> chipping) {
  if (chipping.size() != n) {
    throw DimensionMismatch("chipping sequence has " + std::to_string(chipping.size()) + " entries, expected " +
                            std::to_string(n));
  }
  MeasurementOperator op = css_rows(n, m);
  op.kind_ = OperatorKind::random_demodulator;
  op.chipping_ = std::move(chipping);
  return op;
}

MeasurementOperator MeasurementOperator::rademacher(RealMatrix entries, std::size_t kappa) {
  const auto n = static_cast<std::size_t>(entries.cols());
  const std::size_t m = measurement_count(n, kappa);
  if (static_cast<std::size_t>(entries.rows()) != m) {
    throw DimensionMismatch("Rademacher matrix has " + std::to_string(entries.rows()) + " rows, expected " +
                            std::to_string(m));
  }
  MeasurementOperator op = rademacher_rows(std::move(entries));
  op.kappa_ = kappa;
  return op;
}

MeasurementOperator MeasurementOperator::rademacher_rows(RealMatrix entries) {
  const auto n = static_cast<std::size_t>(entries.cols());
  const auto m = static_cast<std::size_t>(entries.rows());
  if (m < 1 || m > n) throw InvalidRatio("Rademacher matrix must have 1 <= rows <= cols");
  MeasurementOperator op;
  op.kind_ = OperatorKind::rademacher;
  op.n_ = n;
  op.m_ = m;
  op.kappa_ = (2 * n + m) / (2 * m);
  op.dense_ = std::move(entries);
  return op;
}

ComplexVector MeasurementOperator::apply(const ComplexVector& x) const {
  if (static_cast<std::size_t>(x.size()) != n_) {
    throw DimensionMismatch("operator expects length " + std::to_string(n_) + ", got " + std::to_string(x.size()));
  }
  switch (kind_) {
    case OperatorKind::identity:
      return x;
    case OperatorKind::rademacher: {
      ComplexVector y(static_cast<Eigen::Index>(m_));
      y.real() = dense_ * x.real();
      y.imag() = dense_ * x.imag();
      return y;
    }
    case OperatorKind::css:
    case OperatorKind::random_demodulator: {
      const bool chip = kind_ == OperatorKind::random_demodulator;
      ComplexVector y = ComplexVector::Zero(static_cast<Eigen::Index>(m_));
      for (std::size_t r = 0; r < m_; ++r) {
        Complex acc{0.0, 0.0};
        for (std::size_t c = bounds_[r]; c < bounds_[r + 1]; ++c) {
          const Complex v = x[static_cast<Eigen::Index>(c)];
          acc += chip ? chipping_[c] * v : v;
        }
        y[static_cast<Eigen::Index>(r)] = acc;
      }
      return y;
    }
  }
  return {};
}

RealMatrix MeasurementOperator::apply(const RealMatrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != n_) {
    throw DimensionMismatch("operator expects " + std::to_string(n_) + " rows, got " + std::to_string(x.rows()));
  }
  switch (kind_) {
    case OperatorKind::identity:
      return x;
    case OperatorKind::rademacher:
      return dense_ * x;
    case OperatorKind::css:
    case OperatorKind::random_demodulator: {
      const bool chip = kind_ == OperatorKind::random_demodulator;
      RealMatrix y = RealMatrix::Zero(static_cast<Eigen::Index>(m_), x.cols());
      for (std::size_t r = 0; r < m_; ++r) {
        auto row = y.row(static_cast<Eigen::Index>(r));
        for (std::size_t c = bounds_[r]; c < bounds_[r + 1]; ++c) {
          if (chip) {
            row += chipping_[c] * x.row(static_cast<Eigen::Index>(c));
          } else {
            row += x.row(static_cast<Eigen::Index>(c));
          }
        }
      }
      return y;
    }
  }
  return {};
}

RealMatrix MeasurementOperator::apply_transpose(const RealMatrix& v) const {
  if (static_cast<std::size_t>(v.rows()) != m_) {
    throw DimensionMismatch("transpose expects " + std::to_string(m_) + " rows, got " + std::to_string(v.rows()));
  }
  switch (kind_) {
    case OperatorKind::identity:
      return v;
    case OperatorKind::rademacher:
      return dense_.transpose() * v;
    case OperatorKind::css:
    case OperatorKind::random_demodulator: {
      const bool chip = kind_ == OperatorKind::random_demodulator;
      RealMatrix x(static_cast<Eigen::Index>(n_), v.cols());
      for (std::size_t r = 0; r < m_; ++r) {
        const auto row = v.row(static_cast<Eigen::Index>(r));
        for (std::size_t c = bounds_[r]; c < bounds_[r + 1]; ++c) {
          x.row(static_cast<Eigen::Index>(c)) = chip ? RealMatrix(chipping_[c] * row) : RealMatrix(row);
        }
      }
      return x;
    }
  }
  return {};
}

RealMatrix MeasurementOperator::dense() const {
  if (kind_ == OperatorKind::rademacher) return dense_;
  return apply(RealMatrix(RealMatrix::Identity(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_))));
}

MeasurementOperator build_operator(OperatorKind kind, std::size_t n, std::size_t kappa, Rng& rng) {
  if (kind == OperatorKind::identity && kappa != 1) throw InvalidRatio("identity operator requires kappa = 1");
  MeasurementOperator op = build_operator_rows(kind, n, measurement_count(n, kappa), rng);
  op.kappa_ = kappa;
  return op;
}

MeasurementOperator build_operator_rows(OperatorKind kind, std::size_t n, std::size_t m, Rng& rng) {
  switch (kind) {
    case OperatorKind::identity:
      if (m != n) throw InvalidRatio("identity operator requires m = n");
      return MeasurementOperator::identity(n);
    case OperatorKind::css:
      return MeasurementOperator::css_rows(n, m);
    case OperatorKind::random_demodulator: {
      std::vector<double> chipping(n);
      for (auto& e : chipping) e = rng.sign();
      return MeasurementOperator::random_demodulator_rows(n, m, std::move(chipping));
    }
    case OperatorKind::rademacher: {
      if (m < 1 || m > n) throw InvalidRatio("row count " + std::to_string(m) + " invalid for n = " + std::to_string(n));
      RealMatrix entries(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
      // Row-major draw order so the matrix does not depend on Eigen's storage order.
      for (Eigen::Index r = 0; r < entries.rows(); ++r) {
        for (Eigen::Index c = 0; c < entries.cols(); ++c) entries(r, c) = rng.sign();
      }
      return MeasurementOperator::rademacher_rows(std::move(entries));
    }
  }
  throw InvalidRatio("unknown operator kind");
}

ComplexVector Prewhitener::apply(const ComplexVector& y) const {
  if (y.size() != lower_.rows()) throw DimensionMismatch("prewhitener dimension mismatch");
  ComplexVector out(y.size());
  const auto tri = lower_.triangularView<Eigen::Lower>();
  out.real() = tri.solve(y.real());
  out.imag() = tri.solve(y.imag());
  return out;
}

RealMatrix Prewhitener::apply(const RealMatrix& a) const {
  if (a.rows() != lower_.rows()) throw DimensionMismatch("prewhitener dimension mismatch");
  return lower_.triangularView<Eigen::Lower>().solve(a);
}

RealMatrix Prewhitener::matrix() const {
  return apply(RealMatrix(RealMatrix::Identity(lower_.rows(), lower_.rows())));
}

std::optional<Prewhitener> build_prewhitener(const MeasurementOperator& op) {
  if (op.kind() != OperatorKind::rademacher) return std::nullopt;
  const RealMatrix theta = op.dense();
  const RealMatrix gram = theta * theta.transpose();
  Eigen::LLT<RealMatrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw RankDeficient("Theta Theta^T is not positive definite; operator lacks full row rank");
  }
  RealMatrix lower = llt.matrixL();
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    if (!(lower(i, i) > 1e-12 * lower(0, 0))) throw RankDeficient("Cholesky factor is numerically singular");
  }
  return Prewhitener(std::move(lower));
}

void write_operator_csv(const MeasurementOperator& op, std::ostream& out) {
  const RealMatrix d = op.dense();
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.cols(); ++c) {
      if (c) out << ',';
      out << d(r, c);
    }
    out << '\n';
  }
}

}  // namespace css
