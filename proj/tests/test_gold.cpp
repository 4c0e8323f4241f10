#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "css/gold.hpp"

using namespace css;

namespace {

// Independent Galois-field check: the polynomial is primitive iff X has
// multiplicative order 2^m - 1 modulo it.
bool x_has_full_order(const FeedbackPolynomial& p) {
  const int m = p.degree();
  std::uint64_t mask = 0;
  for (int e : p.exponents()) mask |= 1ULL << e;
  const std::uint64_t period = (1ULL << m) - 1;
  std::uint64_t v = 1;
  for (std::uint64_t k = 1; k <= period; ++k) {
    v <<= 1;
    if (v >> m & 1ULL) v ^= mask;
    if (v == 1) return k == period;
  }
  return false;
}

long naive_correlation(const std::vector<int>& a, const std::vector<int>& b, std::size_t lag) {
  long s = 0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[(n + lag) % a.size()];
  return s;
}

}  // namespace

TEST_CASE("standard pairs match the published polynomials") {
  auto p5 = standard_pair(5);
  REQUIRE(p5);
  CHECK(p5->first.to_string() == "X^5 + X^2 + 1");
  CHECK(p5->second.to_string() == "X^5 + X^4 + X^3 + X^2 + 1");
  CHECK(standard_pair(7)->first.to_string() == "X^7 + X^6 + 1");
  CHECK(standard_pair(7)->second.to_string() == "X^7 + X^4 + 1");
  CHECK(standard_pair(10)->first.to_string() == "X^10 + X^3 + 1");
  CHECK(standard_pair(10)->second.to_string() == "X^10 + X^9 + X^8 + X^6 + X^3 + X^2 + 1");
  CHECK_FALSE(standard_pair(6));
}

TEST_CASE("m-sequences have full period and balance") {
  for (int m : {5, 7, 10}) {
    const auto pair = *standard_pair(m);
    for (const auto& poly : {pair.first, pair.second}) {
      CHECK(x_has_full_order(poly));
      const MSequence s = generate_m_sequence(poly);
      const std::size_t n = (1u << m) - 1;
      REQUIRE(s.size() == n);
      // One more -1 (bit 1) than +1.
      const long sum = std::accumulate(s.chips.begin(), s.chips.end(), 0L);
      CHECK(sum == -1);
      // Two-valued autocorrelation.
      for (std::size_t lag = 1; lag < n; lag += 7) CHECK(naive_correlation(s.chips, s.chips, lag) == -1);
    }
  }
}

TEST_CASE("LFSR recurrence holds for every output bit") {
  const auto poly = FeedbackPolynomial::from_exponents({7, 4});
  const MSequence s = generate_m_sequence(poly, 0x15);
  std::vector<int> bits;
  for (int c : s.chips) bits.push_back(c < 0 ? 1 : 0);
  for (int i = 0; i < 7; ++i) CHECK(bits[static_cast<std::size_t>(i)] == ((0x15 >> i) & 1));
  const std::size_t n = bits.size();
  for (std::size_t i = 0; i < n; ++i) CHECK(bits[(i + 7) % n] == (bits[i] ^ bits[(i + 4) % n]));
}

TEST_CASE("non-primitive polynomial and zero seed are rejected") {
  CHECK_THROWS_AS(generate_m_sequence(FeedbackPolynomial::from_exponents({4, 2})), NotMaximumLength);
  CHECK_THROWS_AS(generate_m_sequence(FeedbackPolynomial::from_exponents({5, 2}), 0u), InvalidPolynomial);
  const auto a = FeedbackPolynomial::from_exponents({5, 2});
  CHECK_THROWS_AS(build_gold_dictionary(a, a), InvalidPair);
}

TEST_CASE("periodic correlation agrees with the naive sum") {
  const auto pair = *standard_pair(5);
  const auto a = generate_m_sequence(pair.first).chips;
  const auto b = generate_m_sequence(pair.second).chips;
  const auto r = periodic_correlation(a, b);
  REQUIRE(r.size() == a.size());
  for (std::size_t l = 0; l < a.size(); ++l) CHECK(r[l] == naive_correlation(a, b, l));
  CHECK_THROWS_AS(periodic_correlation(a, std::vector<int>(3, 1)), LengthMismatch);
}

TEST_CASE("Gold cross-correlation is three-valued") {
  for (auto [m, t] : {std::pair{5, 9L}, std::pair{7, 17L}, std::pair{10, 65L}}) {
    CHECK(gold_t(m) == t);
    const GoldDictionary d = build_gold_dictionary(m);
    CHECK(d.correlation_values == std::vector<long>{-t, -1, t - 2});
  }
}

TEST_CASE("dictionary columns follow the shift rule") {
  const GoldDictionary d = build_gold_dictionary(5);
  const std::size_t n = d.size();
  REQUIRE(n == 31);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(d.psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
            d.g1.chips[i] * d.g2.chips[(i + j + 1) % n]);
    }
  }
  // Distinct columns, all +-1, pairwise cross-correlations bounded by t.
  const RealMatrix gram = d.psi.transpose() * d.psi;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) CHECK(std::abs(gram(a, b)) <= d.t);
  }
  CHECK((d.psi.array().abs() == 1.0).all());
}

TEST_CASE("CSV export round-trips the dictionary") {
  const GoldDictionary d = build_gold_dictionary(5);
  std::ostringstream s;
  write_dictionary_csv(d, s);
  std::istringstream in(s.str());
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ls, cell, ',')) {
      CHECK(std::stod(cell) == d.psi(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)));
      ++col;
    }
    CHECK(col == d.size());
    ++row;
  }
  CHECK(row == d.size());
  const auto meta = dictionary_metadata(d);
  CHECK(meta["t"] == 9);
}

TEST_CASE("FFT correlator equals the dense adjoint") {
  for (int m : {5, 7, 10}) {
    const GoldDictionary d = build_gold_dictionary(m);
    const GoldCorrelator c(d);
    const auto n = static_cast<Eigen::Index>(d.size());
    for (Eigen::Index cols : {1, 2, 3}) {
      const RealMatrix u = RealMatrix::Random(n, cols);
      const RealMatrix dense = d.psi.transpose() * u;
      CHECK((c.adjoint(u) - dense).norm() < 1e-10 * dense.norm());
    }
  }
  const GoldCorrelator c(build_gold_dictionary(5));
  CHECK_THROWS_AS(c.adjoint(RealMatrix::Zero(30, 2)), DimensionMismatch);
}
