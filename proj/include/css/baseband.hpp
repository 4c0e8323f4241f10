#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "css/rng.hpp"
#include "css/types.hpp"

namespace css {

/// Transmitted or decided bits; two per QPSK symbol.
struct BitBlock {
  std::vector<std::uint8_t> bits;

  std::size_t size() const noexcept { return bits.size(); }
  bool operator==(const BitBlock&) const = default;
};

/// Gray map: 00 -> 1+j, 01 -> 1-j, 11 -> -1-j, 10 -> -1+j. The first bit sets
/// the sign of the real part, the second the sign of the imaginary part.
Complex qpsk_symbol(std::uint8_t first, std::uint8_t second);

/// Sparse alpha with its active indices (ascending).
struct SparseSymbolVector {
  ComplexVector alpha;
  Support support;

  std::size_t sparsity() const noexcept { return support.size(); }
};

struct EncodedSlot {
  SparseSymbolVector symbols;
  ComplexVector x;
};

/// Symbol k carries bits (2k, 2k+1) and is placed at the k-th smallest index
/// of `support`; x = Psi alpha. `amplitudes`, when given, scales symbol k.
/// Throws SupportOutOfRange for indices >= N or repeated indices and
/// DimensionMismatch when the bit count is not 2|support|.
EncodedSlot encode(const BitBlock& bits, Support support, const RealMatrix& psi,
                   std::span<const double> amplitudes = {});

/// S distinct indices drawn uniformly from [0, n), ascending.
Support random_support(std::size_t n, std::size_t sparsity, Rng& rng);
BitBlock random_bits(std::size_t count, Rng& rng);

struct NoisySignal {
  ComplexVector samples;
  /// Complex noise variance per sample (sigma^2 / 2 per real component).
  double sigma2 = 0.0;
};

/// sigma^2 such that ||x||^2 / (N sigma^2) equals the requested linear SNR.
double noise_variance_for_snr(const ComplexVector& x, double snr_linear);

/// x + w with w circular complex Gaussian, E||w||^2 = N sigma^2. An infinite
/// `snr_db` returns x unchanged.
NoisySignal add_awgn(const ComplexVector& x, double snr_db, Rng& rng);

/// Adds N sigma^2 of white complex noise from unit-variance draws in `unit`
/// (length N). Used when the same noise shape is reused across receivers.
ComplexVector add_scaled_noise(const ComplexVector& x, const ComplexVector& unit, double sigma2);

enum class SupportMode {
  /// Decide at the true indices whatever the estimated support is.
  known,
  /// Indices missing from the estimate count as two bit errors.
  estimated,
};

enum class SpuriousPolicy {
  /// Extra detected indices carry no transmitted bits and are not scored.
  ignore,
  /// Each extra detected index adds two bit errors.
  penalize,
};

struct SlotDecision {
  BitBlock bits;
  /// One flag per transmitted symbol: the estimate missed its index.
  std::vector<bool> erased;
  std::size_t bit_errors = 0;
  std::size_t missed = 0;
  std::size_t spurious = 0;
};

/// Hard QPSK decisions on alpha_hat. Erased symbols get bits that differ from
/// the transmitted ones so that `bits` agrees with `bit_errors`.
SlotDecision decode(const ComplexVector& alpha_hat, const Support& true_support, const BitBlock& sent,
                    SupportMode mode = SupportMode::estimated, SpuriousPolicy spurious = SpuriousPolicy::ignore);

enum class MfskAxis {
  /// Exponent N * SNR (1/k - 1).
  snr,
  /// Exponent log2(4) * Eb/N0 * (1/k - 1).
  ebn0,
};

/// Bit error probability of non-coherent orthogonal M-ary signalling,
///   Pb = M / (2(M-1)) * (1/M) * sum_{k=2}^{M} (-1)^k C(M,k) exp(g (1/k - 1)),
/// with g = M * value on the SNR axis and g = 2 * value on the Eb/N0 axis.
/// The alternating sum cancels catastrophically for large M, so it is
/// evaluated through its integral form
///   Ps = int_0^inf p_rice(x; sqrt(2g)) [1 - (1 - e^{-x^2/2})^{M-1}] dx,
/// whose integrand is non-negative.
double theoretical_ber_mfsk(std::size_t alphabet, double value_linear, MfskAxis axis = MfskAxis::snr);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

}  // namespace css
