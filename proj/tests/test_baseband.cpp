#include <doctest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "css/baseband.hpp"
#include "css/gold.hpp"

using namespace css;

namespace {

// Classic alternating-sum form of non-coherent orthogonal M-ary signalling,
//   Ps = sum_{k=1}^{M-1} (-1)^{k+1} C(M-1, k) / (k+1) exp(-k/(k+1) gamma),
// in enough decimal digits that the cancellation is harmless for M = 1023.
double mfsk_reference(std::size_t alphabet, double gamma) {
  using Big = boost::multiprecision::number<boost::multiprecision::cpp_dec_float<400>>;
  Big sum = 0, binom = 1;
  const auto mm = static_cast<long>(alphabet) - 1;
  for (long k = 1; k <= mm; ++k) {
    binom = binom * (mm - k + 1) / k;
    Big term = binom / (k + 1) * exp(Big(-gamma) * k / (k + 1));
    sum += (k % 2 == 1) ? term : Big(-term);
  }
  const double ps = static_cast<double>(sum);
  return static_cast<double>(alphabet) / (2.0 * static_cast<double>(alphabet - 1)) * ps;
}

}  // namespace

TEST_CASE("Gray QPSK mapping") {
  CHECK(qpsk_symbol(0, 0) == Complex(1, 1));
  CHECK(qpsk_symbol(0, 1) == Complex(1, -1));
  CHECK(qpsk_symbol(1, 1) == Complex(-1, -1));
  CHECK(qpsk_symbol(1, 0) == Complex(-1, 1));
}

TEST_CASE("encode places symbols and forms x = Psi alpha") {
  const auto d = build_gold_dictionary(5);
  const BitBlock bits{{0, 0, 1, 1, 1, 0}};
  const auto slot = encode(bits, {20, 3, 9}, d.psi);
  CHECK(slot.symbols.support == Support{3, 9, 20});
  CHECK(slot.symbols.alpha[3] == Complex(1, 1));
  CHECK(slot.symbols.alpha[9] == Complex(-1, -1));
  CHECK(slot.symbols.alpha[20] == Complex(-1, 1));
  CHECK(slot.symbols.alpha.cwiseAbs().sum() == doctest::Approx(3 * std::sqrt(2.0)));
  const ComplexVector x = d.psi.cast<Complex>() * slot.symbols.alpha;
  CHECK((slot.x - x).norm() < 1e-12);
  CHECK_THROWS_AS(encode(bits, {1, 1, 2}, d.psi), SupportOutOfRange);
  CHECK_THROWS_AS(encode(bits, {1, 2, 31}, d.psi), SupportOutOfRange);
  CHECK_THROWS_AS(encode(bits, {1, 2}, d.psi), DimensionMismatch);
}

TEST_CASE("decode round-trips and scores misses") {
  const auto d = build_gold_dictionary(5);
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Support sup = random_support(31, 4, rng);
    const BitBlock bits = random_bits(8, rng);
    const auto slot = encode(bits, sup, d.psi);
    const auto dec = decode(slot.symbols.alpha, sup, bits);
    CHECK(dec.bit_errors == 0);
    CHECK(dec.bits == bits);
  }
  const BitBlock bits{{0, 0, 1, 1}};
  const auto slot = encode(bits, {2, 5}, d.psi);
  ComplexVector est = slot.symbols.alpha;
  est[5] = 0;
  est[7] = Complex(1, 1);
  const auto dec = decode(est, {2, 5}, bits);
  CHECK(dec.missed == 1);
  CHECK(dec.spurious == 1);
  CHECK(dec.bit_errors == 2);
  CHECK(dec.erased == std::vector<bool>{false, true});
  CHECK(decode(est, {2, 5}, bits, SupportMode::estimated, SpuriousPolicy::penalize).bit_errors == 4);
  const auto known = decode(est, {2, 5}, bits, SupportMode::known);
  CHECK(known.missed == 0);
}

TEST_CASE("random support is sorted, distinct and uniform") {
  Rng rng(99);
  std::vector<int> hits(31, 0);
  for (int t = 0; t < 31000; ++t) {
    const auto s = random_support(31, 3, rng);
    REQUIRE(s.size() == 3);
    CHECK((s[0] < s[1] && s[1] < s[2]));
    for (auto i : s) ++hits[i];
  }
  for (int h : hits) CHECK(std::abs(h - 3000) < 300);
}

TEST_CASE("AWGN moments match the requested SNR") {
  Rng rng(17);
  const std::size_t n = 1023;
  ComplexVector x(static_cast<Eigen::Index>(n));
  for (auto& v : x) v = Complex(rng.sign(), rng.sign());
  for (double snr_db : {-20.0, 0.0, 10.0}) {
    const double sigma2 = noise_variance_for_snr(x, db_to_linear(snr_db));
    CHECK(x.squaredNorm() / (n * sigma2) == doctest::Approx(db_to_linear(snr_db)));
    double power = 0.0, re = 0.0, im = 0.0;
    Complex mean = 0.0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
      const auto noisy = add_awgn(x, snr_db, rng);
      CHECK(noisy.sigma2 == doctest::Approx(sigma2));
      const ComplexVector w = noisy.samples - x;
      power += w.squaredNorm();
      re += w.real().squaredNorm();
      im += w.imag().squaredNorm();
      mean += w.sum();
    }
    const double count = static_cast<double>(reps * n);
    CHECK(power / count == doctest::Approx(sigma2).epsilon(0.02));
    CHECK(re / count == doctest::Approx(sigma2 / 2).epsilon(0.02));
    CHECK(im / count == doctest::Approx(sigma2 / 2).epsilon(0.02));
    CHECK(std::abs(mean / count) < 0.02 * std::sqrt(sigma2));
  }
  CHECK((add_awgn(x, std::numeric_limits<double>::infinity(), rng).samples - x).norm() == 0.0);
}

TEST_CASE("MFSK theory matches the high-precision alternating sum") {
  for (std::size_t alphabet : {2u, 31u, 1023u}) {
    for (double db : {-30.0, -25.0, -20.0, -15.0}) {
      const double snr = db_to_linear(db);
      const double g = static_cast<double>(alphabet) * snr;
      const double ref = mfsk_reference(alphabet, g);
      const double got = theoretical_ber_mfsk(alphabet, snr, MfskAxis::snr);
      if (ref < 1e-300) continue;
      CHECK(got == doctest::Approx(ref).epsilon(1e-6));
    }
    for (double ebn0_db : {0.0, 4.0, 8.0}) {
      const double e = db_to_linear(ebn0_db);
      CHECK(theoretical_ber_mfsk(alphabet, e, MfskAxis::ebn0) ==
            doctest::Approx(mfsk_reference(alphabet, 2.0 * e)).epsilon(1e-6));
    }
  }
  // Binary case has the closed form 0.5 exp(-g / 2).
  CHECK(theoretical_ber_mfsk(2, 3.0) == doctest::Approx(0.5 * std::exp(-3.0)).epsilon(1e-9));
}

TEST_CASE("MFSK theory decreases with SNR") {
  double prev = 1.0;
  for (double db = -35.0; db <= -10.0; db += 0.5) {
    const double p = theoretical_ber_mfsk(1023, db_to_linear(db));
    CHECK(p <= prev);
    prev = p;
  }
}
