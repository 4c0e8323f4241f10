#pragma once

#include <optional>

#include "css/rng.hpp"
#include "css/sampling.hpp"
#include "css/types.hpp"

namespace css {

/// Parameters of the oversampled RF emulation.
struct ChainConfig {
  double chip_rate = 1e6;
  std::size_t baseband_oversampling = 10;
  double carrier = 3e6;
  double rf_sample_rate = 12e6;
  double rrc_rolloff = 1.0;
  /// Filter length in chips; the filter has span * oversampling + 1 taps.
  std::size_t rrc_span = 8;
  /// Bits per real sample after the measurement stage; nullopt disables.
  std::optional<int> quantizer_bits;

  double baseband_rate() const { return chip_rate * static_cast<double>(baseband_oversampling); }

  /// Throws ConfigError on a rolloff outside (0, 1], a non-integral rate
  /// ratio or a carrier that does not fit under rf_sample_rate / 2.
  void validate() const;
};

/// Complex baseband or real RF samples with their sample rate.
///
/// `origin` is the sample index of chip 0; chip k sits at
/// origin + k * rate / chip_rate.
struct OversampledSignal {
  ComplexVector samples;
  double rate = 0.0;
  std::size_t origin = 0;
  std::size_t chips = 0;
};

struct RfSignal {
  RealVector samples;
  double rate = 0.0;
  std::size_t origin = 0;
  std::size_t chips = 0;
};

/// Unit-energy root-raised-cosine taps sampled at the baseband rate.
RealVector rrc_taps(const ChainConfig& cfg);

/// Each chip drives the RRC filter; I = Re(x) and Q = Im(x). The output is
/// zero-padded by one filter span on each side and its length is chosen so
/// that the FFT resampling steps have small prime factors.
OversampledSignal pulse_shape(const ComplexVector& chips, const ChainConfig& cfg);

/// FFT-domain resampling to rf_sample_rate followed by
/// s(t) = I(t) cos(w_c t) + Q(t) sin(w_c t). Throws RateMismatch when the
/// input is not at the baseband rate.
RfSignal up_convert(const OversampledSignal& baseband, const ChainConfig& cfg);

/// Real white noise for the requested Eb/N0, where Eb is the slot's RF
/// energy divided by `bits_per_slot` and the two-sided noise density is
/// N0 / 2 = variance / rf_sample_rate.
RfSignal add_rf_noise(const RfSignal& signal, double ebn0_db, std::size_t bits_per_slot, Rng& rng);

/// Mixes with exp(-j w_c t), zeroes every FFT bin above chip_rate and
/// returns to the baseband rate. The quadrature convention of up_convert
/// leaves (I - jQ) / 2 at baseband, so the output is scaled by 2 and
/// conjugated to give I + jQ.
OversampledSignal down_convert(const RfSignal& rf, const ChainConfig& cfg);

/// Full matched-filter output at the baseband rate.
ComplexVector matched_filter(const OversampledSignal& baseband, const ChainConfig& cfg);

/// Matched filter sampled at the chip instants (shifted by `timing_offset`
/// baseband samples), then the measurement operator. Throws RateMismatch or
/// DimensionMismatch.
ComplexVector matched_filter_and_sample(const OversampledSignal& baseband, const MeasurementOperator& op,
                                        const ChainConfig& cfg, long timing_offset = 0);

/// Chip-instant matched-filter samples without a measurement operator.
ComplexVector sample_chips(const OversampledSignal& baseband, const ChainConfig& cfg, long timing_offset = 0);

/// Clip levels for the real and imaginary streams.
struct QuantizerLevels {
  double real = 0.0;
  double imag = 0.0;
};

/// loading * RMS of each component stream.
QuantizerLevels rms_clip_levels(const ComplexVector& v, double loading = 3.0);

/// Per component: clip to [-L, L] and map to the nearest of 2^bits mid-rise
/// levels (k + 1/2) * 2L / 2^bits.
ComplexVector quantize_uniform(const ComplexVector& v, int bits, const QuantizerLevels& levels);

/// Clip levels from rms_clip_levels(v).
ComplexVector quantize_uniform(const ComplexVector& v, int bits);

/// Intermediate signals of one slot, for the CLI's --tap option.
struct RfTrace {
  OversampledSignal tx_baseband;
  RfSignal rf;
  RfSignal rf_noisy;
  OversampledSignal rx_baseband;
  ComplexVector chips;
  ComplexVector measurements;
};

/// One slot through the chain: shape, up-convert, noise, down-convert,
/// matched filter, measurement operator, optional quantizer.
/// An infinite `ebn0_db` skips the noise.
ComplexVector rf_receive(const ComplexVector& chips, const MeasurementOperator& op, const ChainConfig& cfg,
                         double ebn0_db, std::size_t bits_per_slot, Rng& noise_rng, RfTrace* trace = nullptr);

}  // namespace css
