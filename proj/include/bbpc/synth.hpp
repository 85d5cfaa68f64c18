#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bbpc/junction.hpp"
#include "bbpc/trace_file.hpp"

namespace bbpc {

// Piecewise-linear curve over frequency; a single knot means a constant.
struct FrequencyCurve {
  std::vector<std::pair<double, double>> knots;  // (f, value), sorted by f

  FrequencyCurve() = default;
  explicit FrequencyCurve(double constant) { knots.push_back({0.0, constant}); }
  double at(double f) const;
  bool empty() const { return knots.empty(); }
};

// Measurement chain between the source and the stored samples.
struct ChainModel {
  FrequencyCurve gain_db;      // power gain
  FrequencyCurve noise_temp;   // amplifier noise temperature, K
  DispersionModel dispersion;  // phase of g(f)
  double impedance = 50.0;     // ohms, for the added-noise voltage scale
  int adc_bits = 0;            // 0 disables the ADC model
  double adc_fullscale = 0.0;  // volts
  double adc_epsilon = 0.0;    // cubic term: v -> v + eps v^3 / fullscale^2

  bool has_gain() const { return !gain_db.empty(); }
  double amplitude_gain(double f) const;  // 10^(dB/20)
  double inverse_amplitude_gain(double f) const;
};

struct SynthConfig {
  double sample_rate = 32e9;
  double impedance = 50.0;
  uint64_t seed = 1;
  uint64_t segment_samples = 1 << 22;  // must keep f_pump on the segment grid
  double store_sigma_headroom = 8.0;   // int16 full scale in units of rms
};

// Synthesize one segment of the Gaussian source described by `state`:
// complex bin amplitudes with <|a|^2> = n_bar + 1/2 (vacuum as classical
// proxy) and <a(f) a(fp-f)> = m_bar, scaled per bin by sqrt(Z h f / 2).
// Deterministic in (seed, sequence_id).
TraceSegment synth_segment(const SpectralState& state, const SynthConfig& cfg,
                           uint64_t sequence_id);

struct ChainReport {
  uint64_t clipped = 0;
  uint64_t total = 0;
  double clip_fraction() const { return total ? double(clipped) / total : 0.0; }
  bool warn() const { return clip_fraction() > 0.01; }
};

// Amplifier noise (noise_temp), |g| e^{i phi} filtering, then the ADC model
// (cubic nonlinearity, mid-tread rounding, saturating clip). When no ADC is
// configured, fixed_scale > 0 pins the int16 storage scale (needed when many
// segments share one file header).
ChainReport apply_chain(TraceSegment& seg, const ChainModel& chain,
                        uint64_t noise_seed, double fixed_scale = 0.0);

// Synthesize `n_segments` segments (optionally through a chain) into a trace
// file. Returns total samples written.
uint64_t synth_to_file(const std::string& path, const SpectralState& state,
                       const SynthConfig& cfg, uint64_t n_segments,
                       const ChainModel* chain = nullptr);

} // namespace bbpc
