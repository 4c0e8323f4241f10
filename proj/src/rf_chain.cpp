#include "css/rf_chain.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace css {

namespace {

using CVec = std::vector<Complex>;

constexpr double kPi = std::numbers::pi;

bool five_smooth(std::size_t n) {
  for (std::size_t p : {2u, 3u, 5u}) {
    while (n % p == 0) n /= p;
  }
  return n == 1;
}

// Integer ratio num/den of rf_sample_rate to the baseband rate.
std::pair<std::size_t, std::size_t> rate_ratio(const ChainConfig& cfg) {
  const double ratio = cfg.rf_sample_rate / cfg.baseband_rate();
  for (std::size_t den = 1; den <= 1000; ++den) {
    const double num = ratio * static_cast<double>(den);
    if (std::abs(num - std::round(num)) < 1e-9) return {static_cast<std::size_t>(std::llround(num)), den};
  }
  throw RateMismatch("rf_sample_rate / baseband rate is not a small rational");
}

bool same_rate(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

CVec to_std(const ComplexVector& v) { return CVec(v.data(), v.data() + v.size()); }


// Copies the bins of `spectrum` with |f| <= cutoff into a spectrum of length
// `out_len` (same bin spacing); higher bins are dropped.
CVec copy_band(const CVec& spectrum, double bin_hz, double cutoff, std::size_t out_len) {
  const std::size_t in_len = spectrum.size();
  CVec out(out_len, Complex{0.0, 0.0});
  const std::size_t half = std::min(in_len, out_len) / 2;
  for (std::size_t k = 0; k < half; ++k) {
    if (static_cast<double>(k) * bin_hz > cutoff) break;
    out[k] = spectrum[k];
    if (k > 0) out[out_len - k] = spectrum[in_len - k];
  }
  return out;
}

}  // namespace

void ChainConfig::validate() const {
  if (!(rrc_rolloff > 0.0 && rrc_rolloff <= 1.0)) throw ConfigError("RRC rolloff must lie in (0, 1]");
  if (chip_rate <= 0.0 || baseband_oversampling < 2) throw ConfigError("invalid chip rate or oversampling");
  if (carrier + chip_rate * (1.0 + rrc_rolloff) >= rf_sample_rate / 2.0) {
    throw ConfigError("carrier band does not fit below rf_sample_rate / 2");
  }
  if (rrc_span < 2 || rrc_span % 2 != 0) throw ConfigError("RRC span must be an even number of chips");
  if (quantizer_bits && (*quantizer_bits < 1 || *quantizer_bits > 24)) {
    throw ConfigError("quantizer bits must lie in [1, 24]");
  }
  rate_ratio(*this);
}

RealVector rrc_taps(const ChainConfig& cfg) {
  const auto l = static_cast<long>(cfg.baseband_oversampling);
  const long half = static_cast<long>(cfg.rrc_span) * l / 2;
  const double beta = cfg.rrc_rolloff;
  RealVector h(2 * half + 1);
  for (long n = -half; n <= half; ++n) {
    const double t = static_cast<double>(n) / static_cast<double>(l);
    double v;
    if (n == 0) {
      v = 1.0 - beta + 4.0 * beta / kPi;
    } else if (std::abs(std::abs(4.0 * beta * t) - 1.0) < 1e-12) {
      v = beta / std::sqrt(2.0) *
          ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * beta)) + (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * beta)));
    } else {
      const double num = std::sin(kPi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(kPi * t * (1.0 + beta));
      const double den = kPi * t * (1.0 - (4.0 * beta * t) * (4.0 * beta * t));
      v = num / den;
    }
    h[n + half] = v;
  }
  return h / h.norm();
}

OversampledSignal pulse_shape(const ComplexVector& chips, const ChainConfig& cfg) {
  cfg.validate();
  const auto [num, den] = rate_ratio(cfg);
  (void)num;
  const std::size_t l = cfg.baseband_oversampling;
  const RealVector h = rrc_taps(cfg);
  const std::size_t half = static_cast<std::size_t>(h.size() / 2);
  const auto n_chips = static_cast<std::size_t>(chips.size());

  std::size_t pad = cfg.rrc_span * l;
  while (pad % den != 0) ++pad;
  const std::size_t needed = 2 * pad + (n_chips ? (n_chips - 1) * l : 0) + 1;
  std::size_t length = needed;
  while (length % den != 0 || !five_smooth(length)) ++length;

  OversampledSignal out{ComplexVector::Zero(static_cast<Eigen::Index>(length)), cfg.baseband_rate(), pad, n_chips};
  for (std::size_t k = 0; k < n_chips; ++k) {
    const Complex c = chips[static_cast<Eigen::Index>(k)];
    if (c == Complex(0.0, 0.0)) continue;
    const std::size_t centre = pad + k * l;
    for (std::size_t i = 0; i < static_cast<std::size_t>(h.size()); ++i) {
      out.samples[static_cast<Eigen::Index>(centre + i - half)] += c * h[static_cast<Eigen::Index>(i)];
    }
  }
  return out;
}

RfSignal up_convert(const OversampledSignal& baseband, const ChainConfig& cfg) {
  if (!same_rate(baseband.rate, cfg.baseband_rate())) {
    throw RateMismatch("up_convert expects the baseband rate " + std::to_string(cfg.baseband_rate()) + " Hz");
  }
  const auto [num, den] = rate_ratio(cfg);
  const auto in_len = static_cast<std::size_t>(baseband.samples.size());
  if (in_len % den != 0 || baseband.origin % den != 0) {
    throw RateMismatch("baseband length is not a multiple of the resampling denominator");
  }
  const std::size_t out_len = in_len / den * num;

  Eigen::FFT<double> fft;
  CVec spectrum;
  fft.fwd(spectrum, to_std(baseband.samples));
  const double bin_hz = baseband.rate / static_cast<double>(in_len);
  CVec wide = copy_band(spectrum, bin_hz, baseband.rate / 2.0, out_len);
  CVec upsampled;
  fft.inv(upsampled, wide);
  const double gain = static_cast<double>(out_len) / static_cast<double>(in_len);

  RfSignal rf{RealVector(static_cast<Eigen::Index>(out_len)), cfg.rf_sample_rate, baseband.origin / den * num,
              baseband.chips};
  const double w = 2.0 * kPi * cfg.carrier / cfg.rf_sample_rate;
  for (std::size_t n = 0; n < out_len; ++n) {
    const Complex b = gain * upsampled[n];
    const double phase = w * static_cast<double>(n);
    rf.samples[static_cast<Eigen::Index>(n)] = b.real() * std::cos(phase) + b.imag() * std::sin(phase);
  }
  return rf;
}

RfSignal add_rf_noise(const RfSignal& signal, double ebn0_db, std::size_t bits_per_slot, Rng& rng) {
  RfSignal out = signal;
  if (std::isinf(ebn0_db) && ebn0_db > 0) return out;
  if (bits_per_slot == 0) throw DimensionMismatch("bits_per_slot must be positive");
  const double energy = signal.samples.squaredNorm() / signal.rate;
  const double eb = energy / static_cast<double>(bits_per_slot);
  const double n0 = eb / std::pow(10.0, ebn0_db / 10.0);
  const double sigma = std::sqrt(n0 * signal.rate / 2.0);
  for (Eigen::Index i = 0; i < out.samples.size(); ++i) out.samples[i] += sigma * rng.normal();
  return out;
}

OversampledSignal down_convert(const RfSignal& rf, const ChainConfig& cfg) {
  if (!same_rate(rf.rate, cfg.rf_sample_rate)) {
    throw RateMismatch("down_convert expects the RF rate " + std::to_string(cfg.rf_sample_rate) + " Hz");
  }
  const auto [num, den] = rate_ratio(cfg);
  const auto in_len = static_cast<std::size_t>(rf.samples.size());
  if (in_len % num != 0 || rf.origin % num != 0) throw RateMismatch("RF length is not a multiple of the ratio");
  const std::size_t out_len = in_len / num * den;

  const double w = 2.0 * kPi * cfg.carrier / cfg.rf_sample_rate;
  CVec mixed(in_len);
  for (std::size_t n = 0; n < in_len; ++n) {
    const double phase = w * static_cast<double>(n);
    mixed[n] = rf.samples[static_cast<Eigen::Index>(n)] * Complex(std::cos(phase), -std::sin(phase));
  }
  Eigen::FFT<double> fft;
  CVec spectrum;
  fft.fwd(spectrum, mixed);
  const double bin_hz = rf.rate / static_cast<double>(in_len);
  CVec band = copy_band(spectrum, bin_hz, cfg.chip_rate, out_len);
  CVec base;
  fft.inv(base, band);
  const double gain = 2.0 * static_cast<double>(out_len) / static_cast<double>(in_len);

  OversampledSignal out{ComplexVector(static_cast<Eigen::Index>(out_len)), cfg.baseband_rate(),
                        rf.origin / num * den, rf.chips};
  for (std::size_t n = 0; n < out_len; ++n) out.samples[static_cast<Eigen::Index>(n)] = gain * std::conj(base[n]);
  return out;
}

ComplexVector matched_filter(const OversampledSignal& baseband, const ChainConfig& cfg) {
  if (!same_rate(baseband.rate, cfg.baseband_rate())) throw RateMismatch("matched filter expects the baseband rate");
  const RealVector h = rrc_taps(cfg);
  const auto half = h.size() / 2;
  const auto len = baseband.samples.size();
  ComplexVector out = ComplexVector::Zero(len);
  for (Eigen::Index n = 0; n < len; ++n) {
    Complex acc{0.0, 0.0};
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      const Eigen::Index src = n + half - i;
      if (src >= 0 && src < len) acc += h[i] * baseband.samples[src];
    }
    out[n] = acc;
  }
  return out;
}

ComplexVector sample_chips(const OversampledSignal& baseband, const ChainConfig& cfg, long timing_offset) {
  if (!same_rate(baseband.rate, cfg.baseband_rate())) throw RateMismatch("matched filter expects the baseband rate");
  const RealVector h = rrc_taps(cfg);
  const auto half = h.size() / 2;
  const auto len = baseband.samples.size();
  const auto l = static_cast<Eigen::Index>(cfg.baseband_oversampling);
  ComplexVector chips(static_cast<Eigen::Index>(baseband.chips));
  for (Eigen::Index k = 0; k < chips.size(); ++k) {
    const Eigen::Index n = static_cast<Eigen::Index>(baseband.origin) + k * l + timing_offset;
    Complex acc{0.0, 0.0};
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      const Eigen::Index src = n + half - i;
      if (src >= 0 && src < len) acc += h[i] * baseband.samples[src];
    }
    chips[k] = acc;
  }
  return chips;
}

ComplexVector matched_filter_and_sample(const OversampledSignal& baseband, const MeasurementOperator& op,
                                        const ChainConfig& cfg, long timing_offset) {
  if (op.cols() != baseband.chips) {
    throw DimensionMismatch("operator has " + std::to_string(op.cols()) + " columns, slot has " +
                            std::to_string(baseband.chips) + " chips");
  }
  return op.apply(sample_chips(baseband, cfg, timing_offset));
}

QuantizerLevels rms_clip_levels(const ComplexVector& v, double loading) {
  if (v.size() == 0) return {};
  const double n = static_cast<double>(v.size());
  return {loading * std::sqrt(v.real().squaredNorm() / n), loading * std::sqrt(v.imag().squaredNorm() / n)};
}

ComplexVector quantize_uniform(const ComplexVector& v, int bits, const QuantizerLevels& levels) {
  if (bits < 1 || bits > 30) throw DimensionMismatch("quantizer bits must lie in [1, 30]");
  const double cells = std::ldexp(1.0, bits);
  auto q = [&](double x, double clip) {
    if (!(clip > 0.0)) return 0.0;
    const double step = 2.0 * clip / cells;
    double k = std::floor(x / step);
    k = std::clamp(k, -cells / 2.0, cells / 2.0 - 1.0);
    return (k + 0.5) * step;
  };
  ComplexVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = Complex(q(v[i].real(), levels.real), q(v[i].imag(), levels.imag));
  return out;
}

ComplexVector quantize_uniform(const ComplexVector& v, int bits) {
  return quantize_uniform(v, bits, rms_clip_levels(v));
}

ComplexVector rf_receive(const ComplexVector& chips, const MeasurementOperator& op, const ChainConfig& cfg,
                         double ebn0_db, std::size_t bits_per_slot, Rng& noise_rng, RfTrace* trace) {
  OversampledSignal tx = pulse_shape(chips, cfg);
  RfSignal rf = up_convert(tx, cfg);
  RfSignal noisy = add_rf_noise(rf, ebn0_db, bits_per_slot, noise_rng);
  OversampledSignal rx = down_convert(noisy, cfg);
  ComplexVector sampled = sample_chips(rx, cfg);
  ComplexVector y = op.apply(sampled);
  if (cfg.quantizer_bits) y = quantize_uniform(y, *cfg.quantizer_bits);
  if (trace) {
    trace->tx_baseband = std::move(tx);
    trace->rf = std::move(rf);
    trace->rf_noisy = std::move(noisy);
    trace->rx_baseband = std::move(rx);
    trace->chips = std::move(sampled);
    trace->measurements = y;
  }
  return y;
}

}  // namespace css
