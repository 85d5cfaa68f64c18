#include "bbpc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "bbpc/constants.hpp"
#include "bbpc/errors.hpp"
#include "bbpc/fft.hpp"
#include "bbpc/rng.hpp"

namespace bbpc {

double FrequencyCurve::at(double f) const {
  if (knots.empty()) return 0.0;
  if (knots.size() == 1 || f <= knots.front().first) {
    return knots.front().second;
  }
  if (f >= knots.back().first) return knots.back().second;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (f <= knots[i].first) {
      const auto& [f0, v0] = knots[i - 1];
      const auto& [f1, v1] = knots[i];
      const double t = (f - f0) / (f1 - f0);
      return v0 * (1.0 - t) + v1 * t;
    }
  }
  return knots.back().second;
}

double ChainModel::amplitude_gain(double f) const {
  return std::pow(10.0, gain_db.at(f) / 20.0);
}

double ChainModel::inverse_amplitude_gain(double f) const {
  const double g = amplitude_gain(f);
  if (!(g > 0.0)) throw ConfigError("chain gain vanishes inside the band");
  return 1.0 / g;
}

namespace {

// Complex Gaussian with <|g|^2> = 1, <g^2> = 0.
std::complex<double> unit_complex_normal(Xoshiro256& rng) {
  double a, b;
  rng.normal_pair(a, b);
  return {a * 0.7071067811865476, b * 0.7071067811865476};
}

// rms of the synthesized voltage, used to pick the int16 storage scale.
double trace_rms(const SpectralState& state, const SynthConfig& cfg) {
  const double df = cfg.sample_rate / static_cast<double>(cfg.segment_samples);
  double var = 0.0;
  for (uint64_t j = 1; j < cfg.segment_samples / 2; ++j) {
    const double f = static_cast<double>(j) * df;
    if (f > state.max_freq()) break;
    var += cfg.impedance * kPlanck * f * (state.n_at(f) + 0.5) * df;
  }
  return std::sqrt(var);
}

} // namespace

TraceSegment synth_segment(const SpectralState& state, const SynthConfig& cfg,
                           uint64_t sequence_id) {
  const uint64_t n = cfg.segment_samples;
  if (n < 16 || (n % 2) != 0) {
    throw ConfigError("segment_samples must be even and >= 16");
  }
  const double fs = cfg.sample_rate;
  const double df = fs / static_cast<double>(n);
  if (state.max_freq() < fs / 2.0 * (1.0 - 1e-12)) {
    throw ConfigError("state grid does not cover [0, sample_rate/2]");
  }
  long pair_bin = -1;  // bins j and pair_bin - j are partners
  if (state.f_pump > 0.0) {
    pair_bin = std::lround(state.f_pump / df);
    if (std::abs(pair_bin * df - state.f_pump) > 1e-3) {
      throw ConfigError(
          "segment_samples does not place f_pump on the synthesis grid");
    }
  }

  Xoshiro256 rng(derive_segment_seed(cfg.seed, sequence_id));
  RealFft fft(n);
  auto* spec = fft.freq();
  const auto n_spec = fft.spectrum_size();
  for (std::size_t q = 0; q < n_spec; ++q) spec[q] = {0.0, 0.0};

  // Bin amplitude: V_j = -i n sqrt(Z h f df / 2) alpha_j with
  // <|alpha_j|^2> = n_bar + 1/2 (vacuum included as classical proxy) and
  // <alpha_j alpha_{pair-j}> = m_bar.
  const auto bin_pref = [&](long j) {
    const double f = static_cast<double>(j) * df;
    return static_cast<double>(n) *
           std::sqrt(cfg.impedance * kPlanck * f * df / 2.0);
  };
  const std::complex<double> minus_i{0.0, -1.0};

  const long top = static_cast<long>(n / 2);  // exclusive; dc, Nyquist empty
  for (long j = 1; j < top; ++j) {
    if (2 * j == pair_bin) {
      // Self-paired bin at f_pump/2: single-mode squeezed draw.
      const double f = static_cast<double>(j) * df;
      const double s2 = state.n_at(f) + 0.5;
      const std::complex<double> m = state.m_at(f);
      const double am = std::abs(m);
      const double cp = std::sqrt(std::max(0.0, s2 + am));
      const double cm = std::sqrt(std::max(0.0, s2 - am));
      const double c = 0.5 * (cp + cm), s = 0.5 * (cp - cm);
      const std::complex<double> g = unit_complex_normal(rng);
      std::complex<double> alpha = c * g + s * std::conj(g);
      if (am > 0.0) alpha *= std::polar(1.0, 0.5 * std::arg(m));
      spec[j] = minus_i * bin_pref(j) * alpha;
      continue;
    }
    const long partner = pair_bin - j;
    if (pair_bin > 0 && partner >= 1 && partner < j) {
      continue;  // already drawn together with the lower bin
    }
    if (pair_bin > 0 && partner > j && partner < top) {
      const double f1 = static_cast<double>(j) * df;
      const double f2 = static_cast<double>(partner) * df;
      const double s1 = state.n_at(f1) + 0.5;
      const double s2 = state.n_at(f2) + 0.5;
      const std::complex<double> m = state.m_at(f1);
      const double rad = s2 - std::norm(m) / s1;
      if (rad < -1e-12 * s2) {
        throw PhysicalityError("pair correlator exceeds synthesizable bound");
      }
      const std::complex<double> g1 = unit_complex_normal(rng);
      const std::complex<double> g2 = unit_complex_normal(rng);
      const std::complex<double> a1 = std::sqrt(s1) * g1;
      const std::complex<double> a2 = (m / std::sqrt(s1)) * std::conj(g1) +
                                      std::sqrt(std::max(0.0, rad)) * g2;
      spec[j] = minus_i * bin_pref(j) * a1;
      spec[partner] = minus_i * bin_pref(partner) * a2;
    } else {
      const double f = static_cast<double>(j) * df;
      const double sj = state.n_at(f) + 0.5;
      spec[j] =
          minus_i * bin_pref(j) * (std::sqrt(sj) * unit_complex_normal(rng));
    }
  }

  fft.inverse();

  TraceSegment seg;
  seg.sample_rate = fs;
  seg.sequence_id = sequence_id;
  const double rms = trace_rms(state, cfg);
  const double fullscale = std::max(rms, 1e-30) * cfg.store_sigma_headroom;
  seg.scale = fullscale / 32767.0;
  seg.codes.resize(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (uint64_t k = 0; k < n; ++k) {
    const double v = fft.time()[k] * inv_n;
    const double c = std::round(v / seg.scale);
    seg.codes[k] = static_cast<int16_t>(std::clamp(c, -32767.0, 32767.0));
  }
  return seg;
}

ChainReport apply_chain(TraceSegment& seg, const ChainModel& chain,
                        uint64_t noise_seed, double fixed_scale) {
  const uint64_t n = seg.codes.size();
  ChainReport report;
  report.total = n;
  RealFft fft(n);
  for (uint64_t k = 0; k < n; ++k) fft.time()[k] = seg.codes[k] * seg.scale;
  fft.forward();
  const double fs = seg.sample_rate;
  const double df = fs / static_cast<double>(n);

  Xoshiro256 rng(noise_seed);
  const bool has_noise = !chain.noise_temp.empty();
  const bool has_gain = chain.has_gain() || chain.dispersion.alpha != 0.0;
  const auto n_spec = fft.spectrum_size();
  for (std::size_t q = 1; q + 1 < n_spec; ++q) {
    const double f = static_cast<double>(q) * df;
    std::complex<double> v = fft.freq()[q];
    if (has_noise) {
      // Amplifier noise referred to the input: occupancy k T_N / (h f).
      const double tn = chain.noise_temp.at(f);
      if (tn > 0.0) {
        const double occ = kBoltzmann * tn / (kPlanck * f);
        const double pref = static_cast<double>(n) *
                            std::sqrt(chain.impedance * kPlanck * f * df / 2.0);
        v += pref * std::sqrt(occ) * unit_complex_normal(rng);
      }
    }
    if (has_gain) {
      v *= chain.amplitude_gain(f) * std::polar(1.0, chain.dispersion.phase(f));
    }
    fft.freq()[q] = v;
  }
  fft.freq()[0] = {0.0, 0.0};
  fft.freq()[n_spec - 1] = {0.0, 0.0};
  fft.inverse();

  const double inv_n = 1.0 / static_cast<double>(n);
  if (chain.adc_bits > 0) {
    if (chain.adc_bits < 8 || chain.adc_bits > 16) {
      throw ConfigError("adc_bits must lie in [8, 16]");
    }
    if (!(chain.adc_fullscale > 0.0)) {
      throw ConfigError("adc_fullscale must be positive");
    }
    const double fs2 = chain.adc_fullscale * chain.adc_fullscale;
    const double lsb = chain.adc_fullscale / double(1 << (chain.adc_bits - 1));
    const double code_max = double((1 << (chain.adc_bits - 1)) - 1);
    seg.scale = lsb;
    for (uint64_t k = 0; k < n; ++k) {
      double v = fft.time()[k] * inv_n;
      v += chain.adc_epsilon * v * v * v / fs2;
      double c = std::round(v / lsb);
      if (c > code_max || c < -code_max) {
        ++report.clipped;
        c = std::clamp(c, -code_max, code_max);
      }
      seg.codes[k] = static_cast<int16_t>(c);
    }
  } else {
    // Keep plain int16 storage, widening the scale for the amplified signal.
    double scale = fixed_scale;
    if (!(scale > 0.0)) {
      double peak = 0.0;
      for (uint64_t k = 0; k < n; ++k) {
        peak = std::max(peak, std::abs(fft.time()[k] * inv_n));
      }
      scale = std::max(peak * 1.4 / 32767.0, 1e-30);
    }
    seg.scale = scale;
    for (uint64_t k = 0; k < n; ++k) {
      const double c = std::round(fft.time()[k] * inv_n / scale);
      if (std::abs(c) > 32767.0) ++report.clipped;
      seg.codes[k] = static_cast<int16_t>(std::clamp(c, -32767.0, 32767.0));
    }
  }
  return report;
}

uint64_t synth_to_file(const std::string& path, const SpectralState& state,
                       const SynthConfig& cfg, uint64_t n_segments,
                       const ChainModel* chain) {
  if (n_segments == 0) throw ConfigError("synth_to_file: zero segments");
  // First segment fixes the shared storage scale.
  TraceSegment first = synth_segment(state, cfg, 0);
  double scale = first.scale;
  if (chain) {
    apply_chain(first, *chain, derive_segment_seed(cfg.seed ^ 0xA5A5A5A5ULL, 0));
    scale = first.scale;
  }
  TraceFileHeader h;
  h.sample_rate = cfg.sample_rate;
  h.bit_depth = chain && chain->adc_bits ? chain->adc_bits : 16;
  h.scale = scale;
  h.segment_len = cfg.segment_samples;
  TraceWriter writer(path, h);
  writer.append(first);
  uint64_t total = first.codes.size();
  for (uint64_t i = 1; i < n_segments; ++i) {
    TraceSegment seg = synth_segment(state, cfg, i);
    if (chain) {
      apply_chain(seg, *chain,
                  derive_segment_seed(cfg.seed ^ 0xA5A5A5A5ULL, i), scale);
    }
    writer.append(seg);
    total += seg.codes.size();
  }
  writer.close();
  return total;
}

} // namespace bbpc
