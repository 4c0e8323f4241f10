#include <doctest.h>

#include <set>

#include <unsupported/Eigen/FFT>

#include "css/gold.hpp"
#include "css/baseband.hpp"
#include "css/rf_chain.hpp"

using namespace css;

namespace {

ComplexVector qpsk_chips(std::size_t n, Rng& rng) {
  ComplexVector c(static_cast<Eigen::Index>(n));
  for (auto& v : c) v = Complex(rng.sign(), rng.sign());
  return c;
}

}  // namespace

TEST_CASE("RRC taps are symmetric with unit energy") {
  const ChainConfig cfg;
  const RealVector h = rrc_taps(cfg);
  CHECK(h.size() == 81);
  CHECK(h.squaredNorm() == doctest::Approx(1.0));
  for (Eigen::Index i = 0; i < h.size(); ++i) CHECK(h[i] == doctest::Approx(h[h.size() - 1 - i]));
  // Nyquist: h * h vanishes at nonzero multiples of the chip period.
  const Eigen::Index l = 10;
  for (Eigen::Index k = 1; k <= 4; ++k) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i + k * l < h.size(); ++i) acc += h[i] * h[i + k * l];
    CHECK(std::abs(acc) < 5e-3);
  }
}

TEST_CASE("shaped signal lengths fit the resampler") {
  const ChainConfig cfg;
  Rng rng(1);
  for (std::size_t n : {31u, 127u}) {
    const auto bb = pulse_shape(qpsk_chips(n, rng), cfg);
    CHECK(bb.samples.size() % 5 == 0);
    CHECK(bb.origin % 5 == 0);
    CHECK(bb.chips == n);
    const auto rf = up_convert(bb, cfg);
    CHECK(rf.rate == 12e6);
    CHECK(rf.samples.size() * 5 == bb.samples.size() * 6);
  }
}

TEST_CASE("noiseless loopback recovers the chips") {
  const ChainConfig cfg;
  Rng rng(2);
  for (std::size_t n : {31u, 127u}) {
    const ComplexVector c = qpsk_chips(n, rng);
    Rng noise(0);
    RfTrace trace;
    const ComplexVector y = rf_receive(c, MeasurementOperator::identity(n), cfg,
                                       std::numeric_limits<double>::infinity(), 2, noise, &trace);
    const double isi = (y - c).norm() / c.norm();
    CHECK(isi < 0.02);
    CHECK(trace.measurements.size() == static_cast<Eigen::Index>(n));
    // Down-conversion inverts up-conversion inside the signal band.
    const ComplexVector diff = trace.rx_baseband.samples - trace.tx_baseband.samples;
    CHECK(diff.norm() / trace.tx_baseband.samples.norm() < 1e-2);
    // Sampling off the chip instant costs signal.
    const ComplexVector late = sample_chips(trace.rx_baseband, cfg, 3);
    CHECK((late - c).norm() / c.norm() > isi);
  }
}

TEST_CASE("matched filter agrees with sampling the full convolution") {
  const ChainConfig cfg;
  Rng rng(9);
  const auto bb = pulse_shape(qpsk_chips(31, rng), cfg);
  const ComplexVector full = matched_filter(bb, cfg);
  const ComplexVector at = sample_chips(bb, cfg);
  for (Eigen::Index k = 0; k < 31; ++k) {
    CHECK(std::abs(at[k] - full[static_cast<Eigen::Index>(bb.origin) + 10 * k]) < 1e-12);
  }
}

TEST_CASE("RF spectrum occupies the carrier band") {
  const ChainConfig cfg;
  Rng rng(3);
  const auto rf = up_convert(pulse_shape(qpsk_chips(127, rng), cfg), cfg);
  Eigen::FFT<double> fft;
  std::vector<double> x(rf.samples.data(), rf.samples.data() + rf.samples.size());
  std::vector<Complex> spec;
  fft.fwd(spec, x);
  const double bin = rf.rate / static_cast<double>(x.size());
  double in = 0.0, total = 0.0;
  for (std::size_t k = 0; k <= x.size() / 2; ++k) {
    const double f = static_cast<double>(k) * bin, e = std::norm(spec[k]);
    total += e;
    if (std::abs(f - cfg.carrier) <= cfg.chip_rate) in += e;
  }
  CHECK(in / total > 0.999);
}

TEST_CASE("RF noise level follows Eb/N0") {
  const ChainConfig cfg;
  Rng rng(4);
  const std::size_t n = 127, bits = 20;
  const ComplexVector c = qpsk_chips(n, rng);
  const auto rf = up_convert(pulse_shape(c, cfg), cfg);
  const double ebn0_db = 6.0;
  Rng noise(5);
  const double eb = rf.samples.squaredNorm() / rf.rate / bits;
  const double n0 = eb / db_to_linear(ebn0_db);
  double var = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) var += (add_rf_noise(rf, ebn0_db, bits, noise).samples - rf.samples).squaredNorm();
  var /= static_cast<double>(reps * rf.samples.size());
  CHECK(var == doctest::Approx(n0 * rf.rate / 2.0).epsilon(0.02));
}

TEST_CASE("chip-rate SNR after the chain matches the discrete model") {
  // Discrete equivalent: per-chip SNR = Eb/N0 * bits / N.
  const ChainConfig cfg;
  Rng rng(6);
  const std::size_t n = 127, bits = 20;
  const ComplexVector c = qpsk_chips(n, rng);
  const double ebn0_db = 10.0;
  const auto id = MeasurementOperator::identity(n);
  Rng noise(7);
  const ComplexVector clean = rf_receive(c, id, cfg, std::numeric_limits<double>::infinity(), bits, noise);
  double var = 0.0;
  const int reps = 300;
  for (int r = 0; r < reps; ++r) var += (rf_receive(c, id, cfg, ebn0_db, bits, noise) - clean).squaredNorm();
  var /= static_cast<double>(reps * n);
  const double snr = c.squaredNorm() / static_cast<double>(n) / var;
  const double expected = db_to_linear(ebn0_db) * static_cast<double>(bits) / static_cast<double>(n);
  CHECK(std::abs(linear_to_db(snr) - linear_to_db(expected)) < 0.25);
}

TEST_CASE("rate mismatches are reported") {
  ChainConfig cfg;
  Rng rng(1);
  auto bb = pulse_shape(qpsk_chips(31, rng), cfg);
  bb.rate = 9e6;
  CHECK_THROWS_AS(up_convert(bb, cfg), RateMismatch);
  ChainConfig bad;
  bad.carrier = 5.5e6;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(matched_filter_and_sample(pulse_shape(qpsk_chips(31, rng), cfg), MeasurementOperator::identity(30), cfg),
                  DimensionMismatch);
}

TEST_CASE("uniform quantizer") {
  Rng rng(8);
  ComplexVector v(4000);
  for (auto& x : v) x = Complex(rng.normal(), 2.0 * rng.normal());
  for (int bits : {1, 2, 4, 6}) {
    const QuantizerLevels lv = rms_clip_levels(v);
    CHECK(lv.imag == doctest::Approx(2.0 * lv.real).epsilon(0.1));
    const ComplexVector q = quantize_uniform(v, bits, lv);
    std::set<double> re_levels;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      re_levels.insert(q[i].real());
      const double step = 2.0 * lv.real / std::ldexp(1.0, bits);
      if (std::abs(v[i].real()) < lv.real) CHECK(std::abs(q[i].real() - v[i].real()) <= step / 2 + 1e-12);
      CHECK(std::abs(q[i].real()) < lv.real);
      CHECK(std::abs(q[i].imag()) < lv.imag);
    }
    CHECK(re_levels.size() <= (1u << bits));
    // Quantizing again on the same levels changes nothing.
    CHECK((quantize_uniform(q, bits, lv) - q).norm() == 0.0);
    // Mid-rise: no zero level.
    CHECK(re_levels.count(0.0) == 0);
  }
  CHECK_THROWS_AS(quantize_uniform(v, 0), DimensionMismatch);
}

TEST_CASE("quantization error shrinks with bits") {
  Rng rng(10);
  ComplexVector v(5000);
  for (auto& x : v) x = Complex(rng.normal(), rng.normal());
  double prev = std::numeric_limits<double>::infinity();
  for (int bits = 1; bits <= 8; ++bits) {
    const double err = (quantize_uniform(v, bits) - v).squaredNorm();
    CHECK(err < prev);
    prev = err;
  }
}
