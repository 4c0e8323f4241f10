#include "css/gold.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include <unsupported/Eigen/FFT>

namespace css {

FeedbackPolynomial FeedbackPolynomial::from_exponents(std::vector<int> exponents) {
  if (exponents.empty()) throw InvalidPolynomial("feedback polynomial has no terms");
  for (int e : exponents) {
    if (e < 0) throw InvalidPolynomial("negative exponent " + std::to_string(e));
  }
  exponents.push_back(0);
  std::sort(exponents.begin(), exponents.end(), std::greater<>());
  exponents.erase(std::unique(exponents.begin(), exponents.end()), exponents.end());
  const int m = exponents.front();
  if (m < 2 || m > 31) throw InvalidPolynomial("degree must be in [2, 31], got " + std::to_string(m));
  return FeedbackPolynomial(std::move(exponents));
}

std::string FeedbackPolynomial::to_string() const {
  std::string s;
  for (int e : exponents_) {
    if (!s.empty()) s += " + ";
    if (e == 0) {
      s += "1";
    } else if (e == 1) {
      s += "X";
    } else {
      s += "X^" + std::to_string(e);
    }
  }
  return s;
}

MSequence generate_m_sequence(const FeedbackPolynomial& poly, std::optional<std::uint32_t> seed) {
  const int m = poly.degree();
  const std::uint32_t mask = (m == 32) ? ~0u : ((1u << m) - 1u);
  const std::uint32_t start = seed.value_or(mask);
  if ((start & mask) == 0 || (start & ~mask) != 0) {
    throw InvalidPolynomial("LFSR seed must be a nonzero " + std::to_string(m) + "-bit word");
  }

  std::uint32_t taps = 0;
  for (int e : poly.exponents()) {
    if (e < m) taps |= 1u << e;
  }

  const std::size_t period = (std::size_t{1} << m) - 1;
  MSequence seq{std::vector<int>(period), poly, start};
  std::uint32_t state = start;
  for (std::size_t n = 0; n < period; ++n) {
    if (n > 0 && state == start) {
      throw NotMaximumLength(poly.to_string() + " has period " + std::to_string(n) + " < " +
                             std::to_string(period));
    }
    seq.chips[n] = (state & 1u) ? -1 : 1;
    const auto feedback = static_cast<std::uint32_t>(__builtin_parity(state & taps));
    state = (state >> 1) | (feedback << (m - 1));
  }
  if (state != start) {
    // A nonsingular LFSR always cycles; reaching here means the constant term was lost.
    throw NotMaximumLength(poly.to_string() + " does not cycle through its seed");
  }
  return seq;
}

std::vector<long> periodic_correlation(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("periodic_correlation: lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  const std::size_t n = a.size();
  std::vector<long> r(n, 0);
  for (std::size_t lag = 0; lag < n; ++lag) {
    long acc = 0;
    for (std::size_t i = 0, j = lag; i < n; ++i) {
      acc += static_cast<long>(a[i]) * b[j];
      if (++j == n) j = 0;
    }
    r[lag] = acc;
  }
  return r;
}

long gold_t(int m) {
  const int e = (m % 2 == 1) ? (m + 1) / 2 : (m + 2) / 2;
  return (1L << e) + 1;
}

std::optional<PolynomialPair> standard_pair(int m) {
  using P = FeedbackPolynomial;
  switch (m) {
    case 5:
      return PolynomialPair{P::from_exponents({5, 2}), P::from_exponents({5, 4, 3, 2})};
    case 7:
      return PolynomialPair{P::from_exponents({7, 6}), P::from_exponents({7, 4})};
    case 10:
      return PolynomialPair{P::from_exponents({10, 3}), P::from_exponents({10, 9, 8, 6, 3, 2})};
    default:
      return std::nullopt;
  }
}

GoldDictionary build_gold_dictionary(int m) {
  auto pair = standard_pair(m);
  if (!pair) {
    throw InvalidPair("no standard preferred pair for m = " + std::to_string(m) +
                      "; supply both polynomials");
  }
  return build_gold_dictionary(pair->first, pair->second);
}

GoldDictionary build_gold_dictionary(const FeedbackPolynomial& first, const FeedbackPolynomial& second) {
  if (first.degree() != second.degree()) {
    throw InvalidPair("polynomial degrees differ: " + first.to_string() + " vs " + second.to_string());
  }
  const int m = first.degree();
  GoldDictionary dict{RealMatrix{}, m, gold_t(m), generate_m_sequence(first), generate_m_sequence(second), {}};

  const auto cross = periodic_correlation(dict.g1.chips, dict.g2.chips);
  std::set<long> values(cross.begin(), cross.end());
  dict.correlation_values.assign(values.begin(), values.end());
  const std::set<long> expected{-1, -dict.t, dict.t - 2};
  if (values != expected) {
    std::string found;
    for (long v : values) found += (found.empty() ? "" : ", ") + std::to_string(v);
    throw InvalidPair("cross-correlation of " + first.to_string() + " and " + second.to_string() +
                      " takes values {" + found + "}, expected {-1, " + std::to_string(-dict.t) + ", " +
                      std::to_string(dict.t - 2) + "}");
  }

  const std::size_t n = dict.g1.size();
  dict.psi.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t shift = j + 1;
    for (std::size_t i = 0; i < n; ++i) {
      dict.psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          dict.g1.chips[i] * dict.g2.chips[(i + shift) % n];
    }
  }
  return dict;
}

GoldCorrelator::GoldCorrelator(const GoldDictionary& dict) : g1_(dict.g1.chips.begin(), dict.g1.chips.end()) {
  std::vector<Complex> g2(dict.g2.chips.begin(), dict.g2.chips.end());
  Eigen::FFT<double> fft;
  fft.fwd(g2_spectrum_, g2);
}

RealMatrix GoldCorrelator::adjoint(const RealMatrix& u) const {
  const std::size_t n = g1_.size();
  if (static_cast<std::size_t>(u.rows()) != n) {
    throw DimensionMismatch("correlator expects " + std::to_string(n) + " rows, got " + std::to_string(u.rows()));
  }
  RealMatrix out(u.rows(), u.cols());
  Eigen::FFT<double> fft;
  std::vector<Complex> z(n), spectrum, product(n), corr;
  for (Eigen::Index c = 0; c < u.cols(); c += 2) {
    const bool pair = c + 1 < u.cols();
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      z[i] = Complex(g1_[i] * u(r, c), pair ? g1_[i] * u(r, c + 1) : 0.0);
    }
    fft.fwd(spectrum, z);
    // c[l] = sum_n z[n] g2[n + l] has spectrum Z[-k] G2[k].
    for (std::size_t k = 0; k < n; ++k) product[k] = spectrum[(n - k) % n] * g2_spectrum_[k];
    fft.inv(corr, product);
    for (std::size_t j = 0; j < n; ++j) {
      const Complex v = corr[(j + 1) % n];
      const auto r = static_cast<Eigen::Index>(j);
      out(r, c) = v.real();
      if (pair) out(r, c + 1) = v.imag();
    }
  }
  return out;
}

void write_dictionary_csv(const GoldDictionary& dict, std::ostream& out) {
  const auto n = dict.psi.rows();
  std::string line;
  for (Eigen::Index i = 0; i < n; ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j) line += ',';
      line += dict.psi(i, j) > 0 ? "1" : "-1";
    }
    line += '\n';
    out << line;
  }
}

nlohmann::json dictionary_metadata(const GoldDictionary& dict) {
  return {
      {"m", dict.m},
      {"n", dict.size()},
      {"t", dict.t},
      {"poly1", {{"exponents", dict.g1.poly.exponents()}, {"text", dict.g1.poly.to_string()}}},
      {"poly2", {{"exponents", dict.g2.poly.exponents()}, {"text", dict.g2.poly.to_string()}}},
      {"seed1", dict.g1.seed},
      {"seed2", dict.g2.seed},
      {"bit_mapping", "0 -> +1, 1 -> -1"},
      {"column_rule", "column j = g1 xor shift(g2, j + 1)"},
      {"correlation_values", dict.correlation_values},
  };
}

}  // namespace css
