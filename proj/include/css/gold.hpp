#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "css/types.hpp"

namespace css {

/// Binary feedback polynomial X^m + ... + 1 of an LFSR.
///
/// Exponents are kept in descending order and always include the degree m
/// and the constant term 0.
class FeedbackPolynomial {
 public:
  /// Builds from exponents such as {5, 2} or {5, 2, 0}; the constant term is
  /// implied when omitted and the degree is the largest exponent.
  static FeedbackPolynomial from_exponents(std::vector<int> exponents);

  int degree() const noexcept { return exponents_.front(); }
  const std::vector<int>& exponents() const noexcept { return exponents_; }

  /// "X^5 + X^2 + 1"
  std::string to_string() const;

  bool operator==(const FeedbackPolynomial&) const = default;

 private:
  explicit FeedbackPolynomial(std::vector<int> e) : exponents_(std::move(e)) {}
  std::vector<int> exponents_;
};

/// One full period of a maximum-length LFSR sequence, mapped 0 -> +1, 1 -> -1.
struct MSequence {
  std::vector<int> chips;
  FeedbackPolynomial poly;
  std::uint32_t seed;

  std::size_t size() const noexcept { return chips.size(); }
};

/// Runs a Fibonacci LFSR for one period. The state holds (a_n, ..., a_{n+m-1}),
/// the output is the oldest bit a_n, and a_{n+m} is the XOR of a_{n+k} over
/// the non-leading exponents k. Bit i of `seed` is a_i; the default seed is the
/// all-ones state.
///
/// Throws NotMaximumLength when the state returns to the seed before 2^m - 1
/// steps, InvalidPolynomial for a zero seed.
MSequence generate_m_sequence(const FeedbackPolynomial& poly, std::optional<std::uint32_t> seed = std::nullopt);

/// r[l] = sum_n a[n] * b[(n + l) mod N].
std::vector<long> periodic_correlation(std::span<const int> a, std::span<const int> b);

/// Three-valued correlation parameter t of a preferred pair with register length m.
long gold_t(int m);

struct PolynomialPair {
  FeedbackPolynomial first;
  FeedbackPolynomial second;
};

/// Preferred pairs for m = 5, 7 and 10; nullopt otherwise.
std::optional<PolynomialPair> standard_pair(int m);

/// N x N dictionary of Gold codes, N = 2^m - 1.
///
/// Column j holds g1 XOR (g2 cyclically advanced by i = j + 1), i.e.
/// psi(n, j) = g1[n] * g2[(n + j + 1) mod N] in the +-1 domain. The last column
/// (i = N) is the unshifted g1 XOR g2.
struct GoldDictionary {
  RealMatrix psi;
  int m = 0;
  long t = 0;
  MSequence g1;
  MSequence g2;
  /// Distinct values of the periodic cross-correlation of g1 and g2, ascending.
  std::vector<long> correlation_values;

  std::size_t size() const noexcept { return static_cast<std::size_t>(psi.rows()); }
};

/// Uses standard_pair(m); throws InvalidPair when no pair is known for m.
GoldDictionary build_gold_dictionary(int m);

/// Throws InvalidPair unless the pair's cross-correlation takes exactly the
/// values {-1, -t, t - 2}.
GoldDictionary build_gold_dictionary(const FeedbackPolynomial& first, const FeedbackPolynomial& second);

/// Psi^T U in O(N log N) per column.
///
/// Row j of Psi^T U is sum_n g1[n] u[n] g2[(n + j + 1) mod N], a circular
/// cross-correlation of g1 .* u with g2, evaluated by FFT. Two columns are
/// packed into one complex transform.
class GoldCorrelator {
 public:
  explicit GoldCorrelator(const GoldDictionary& dict);
  RealMatrix adjoint(const RealMatrix& u) const;
  std::size_t size() const noexcept { return g1_.size(); }

 private:
  std::vector<double> g1_;
  std::vector<Complex> g2_spectrum_;
};

/// Writes the dictionary as N rows of N comma-separated +-1 integers; column j
/// of the CSV is code j.
void write_dictionary_csv(const GoldDictionary& dict, std::ostream& out);

/// m, polynomials, t and the correlation values that were found.
nlohmann::json dictionary_metadata(const GoldDictionary& dict);

}  // namespace css
