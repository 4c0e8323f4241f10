#include "css/baseband.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gsl/gsl_sf_bessel.h>

namespace css {

Complex qpsk_symbol(std::uint8_t first, std::uint8_t second) {
  return {first ? -1.0 : 1.0, second ? -1.0 : 1.0};
}

EncodedSlot encode(const BitBlock& bits, Support support, const RealMatrix& psi, std::span<const double> amplitudes) {
  const auto n = static_cast<std::size_t>(psi.cols());
  std::sort(support.begin(), support.end());
  if (std::adjacent_find(support.begin(), support.end()) != support.end()) {
    throw SupportOutOfRange("support contains a repeated index");
  }
  if (!support.empty() && support.back() >= n) {
    throw SupportOutOfRange("support index " + std::to_string(support.back()) + " outside [0, " +
                            std::to_string(n) + ")");
  }
  if (bits.size() != 2 * support.size()) {
    throw DimensionMismatch("expected " + std::to_string(2 * support.size()) + " bits, got " +
                            std::to_string(bits.size()));
  }
  if (!amplitudes.empty() && amplitudes.size() != support.size()) {
    throw DimensionMismatch("one amplitude per active code is required");
  }

  EncodedSlot slot;
  slot.symbols.alpha = ComplexVector::Zero(static_cast<Eigen::Index>(n));
  slot.x = ComplexVector::Zero(psi.rows());
  for (std::size_t k = 0; k < support.size(); ++k) {
    Complex s = qpsk_symbol(bits.bits[2 * k], bits.bits[2 * k + 1]);
    if (!amplitudes.empty()) s *= amplitudes[k];
    const auto j = static_cast<Eigen::Index>(support[k]);
    slot.symbols.alpha[j] = s;
    slot.x.real() += s.real() * psi.col(j);
    slot.x.imag() += s.imag() * psi.col(j);
  }
  slot.symbols.support = std::move(support);
  return slot;
}

Support random_support(std::size_t n, std::size_t sparsity, Rng& rng) {
  if (sparsity > n) throw SupportOutOfRange("sparsity exceeds dictionary size");
  // Partial Fisher-Yates over an index table.
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t k = 0; k < sparsity; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(n - k));
    std::swap(pool[k], pool[j]);
  }
  Support s(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(sparsity));
  std::sort(s.begin(), s.end());
  return s;
}

BitBlock random_bits(std::size_t count, Rng& rng) {
  BitBlock b;
  b.bits.resize(count);
  for (auto& bit : b.bits) bit = static_cast<std::uint8_t>(rng.bit());
  return b;
}

double noise_variance_for_snr(const ComplexVector& x, double snr_linear) {
  return x.squaredNorm() / (static_cast<double>(x.size()) * snr_linear);
}

ComplexVector add_scaled_noise(const ComplexVector& x, const ComplexVector& unit, double sigma2) {
  if (unit.size() != x.size()) throw DimensionMismatch("noise and signal lengths differ");
  return x + std::sqrt(sigma2) * unit;
}

NoisySignal add_awgn(const ComplexVector& x, double snr_db, Rng& rng) {
  if (std::isinf(snr_db) && snr_db > 0) return {x, 0.0};
  const double sigma2 = noise_variance_for_snr(x, db_to_linear(snr_db));
  const double component = std::sqrt(sigma2 / 2.0);
  NoisySignal out{x, sigma2};
  for (Eigen::Index i = 0; i < out.samples.size(); ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    out.samples[i] += Complex(component * re, component * im);
  }
  return out;
}

SlotDecision decode(const ComplexVector& alpha_hat, const Support& true_support, const BitBlock& sent,
                    SupportMode mode, SpuriousPolicy spurious) {
  if (sent.size() != 2 * true_support.size()) {
    throw DimensionMismatch("transmitted bits do not match the support size");
  }
  SlotDecision d;
  d.bits.bits.resize(sent.size());
  d.erased.assign(true_support.size(), false);

  for (std::size_t k = 0; k < true_support.size(); ++k) {
    const auto j = true_support[k];
    if (j >= static_cast<std::size_t>(alpha_hat.size())) throw SupportOutOfRange("true support outside alpha_hat");
    const Complex v = alpha_hat[static_cast<Eigen::Index>(j)];
    const bool detected = v != Complex(0.0, 0.0);
    if (mode == SupportMode::estimated && !detected) {
      d.erased[k] = true;
      ++d.missed;
      d.bits.bits[2 * k] = sent.bits[2 * k] ^ 1u;
      d.bits.bits[2 * k + 1] = sent.bits[2 * k + 1] ^ 1u;
      d.bit_errors += 2;
      continue;
    }
    d.bits.bits[2 * k] = v.real() < 0.0 ? 1 : 0;
    d.bits.bits[2 * k + 1] = v.imag() < 0.0 ? 1 : 0;
    d.bit_errors += (d.bits.bits[2 * k] != sent.bits[2 * k]) + (d.bits.bits[2 * k + 1] != sent.bits[2 * k + 1]);
  }

  for (Eigen::Index j = 0; j < alpha_hat.size(); ++j) {
    if (alpha_hat[j] == Complex(0.0, 0.0)) continue;
    if (!std::binary_search(true_support.begin(), true_support.end(), static_cast<std::size_t>(j))) ++d.spurious;
  }
  if (spurious == SpuriousPolicy::penalize) d.bit_errors += 2 * d.spurious;
  return d;
}

double theoretical_ber_mfsk(std::size_t alphabet, double value_linear, MfskAxis axis) {
  if (alphabet < 2) throw DimensionMismatch("alphabet size must be at least 2");
  if (value_linear < 0.0 || std::isnan(value_linear)) throw DimensionMismatch("SNR must be non-negative");
  const double m = static_cast<double>(alphabet);
  const double scale = axis == MfskAxis::snr ? m : 2.0;
  if (std::isinf(value_linear)) return 0.0;
  const double gamma = scale * value_linear;
  const double b = std::sqrt(2.0 * gamma);

  // Rician density of the correct-branch envelope times the probability that
  // at least one of the M-1 noise-only envelopes exceeds it.
  auto integrand = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double rice = x * std::exp(-0.5 * (x - b) * (x - b)) * gsl_sf_bessel_I0_scaled(x * b);
    const double q = std::exp(-0.5 * x * x);
    const double exceed = -std::expm1((m - 1.0) * std::log1p(-q));
    return rice * exceed;
  };

  // The density is concentrated within a few units of b; the exceedance term
  // turns over near sqrt(2 ln M).
  const double lo = std::max(0.0, b - 40.0);
  const double hi = b + 40.0;
  std::vector<double> points{lo, std::clamp(std::sqrt(2.0 * std::log(m)), lo, hi), b, hi};
  std::sort(points.begin(), points.end());
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  double ps = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i + 1] > points[i]) ps += Quad::integrate(integrand, points[i], points[i + 1], 15, 1e-13);
  }
  ps = std::clamp(ps, 0.0, 1.0);
  return m / (2.0 * (m - 1.0)) * ps;
}

}  // namespace css
