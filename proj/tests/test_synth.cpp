#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "bbpc/constants.hpp"
#include "bbpc/errors.hpp"
#include "bbpc/fft.hpp"
#include "bbpc/kernels.hpp"
#include "bbpc/pipeline.hpp"
#include "bbpc/quantum.hpp"
#include "bbpc/synth.hpp"

using namespace bbpc;

namespace {

SynthConfig small_cfg(uint64_t seed = 1) {
  SynthConfig c;
  c.sample_rate = 32e9;
  c.impedance = 50.0;
  c.seed = seed;
  c.segment_samples = 1 << 20;
  return c;
}

DiscreteKernel mode_kernel(double f0, double theta = 0.0) {
  KernelConfig kc;
  kc.sample_rate = 32e9;
  kc.n_taps = 257;
  kc.impedance = 50.0;
  kc.theta = theta;
  const ModeSpec m =
      make_monochromatic(f0, 200e6, SubbandShape::Rect, kc.sample_rate / 257);
  return compose(m, kc);
}

CumulantPair analyze_stream(const SpectralState& state, const SynthConfig& cfg,
                            uint64_t segments, const DiscreteKernel& k) {
  SynthSource source(state, cfg, segments);
  const AnalysisOutput out = run_analysis(source, {&k}, {}, {});
  return out.streams[0].cumulants;
}

} // namespace

TEST_CASE("seeded synthesis is byte-identical and segment-independent") {
  const SpectralState vac = uniform_state(0.0, 0.0, 0.0, 4e6, 16e9);
  SynthConfig cfg = small_cfg(99);
  cfg.segment_samples = 1 << 16;
  const TraceSegment a = synth_segment(vac, cfg, 3);
  const TraceSegment b = synth_segment(vac, cfg, 3);
  CHECK(a.codes == b.codes);
  const TraceSegment c = synth_segment(vac, cfg, 4);
  CHECK(a.codes != c.codes);
  SynthConfig cfg2 = small_cfg(100);
  cfg2.segment_samples = 1 << 16;
  const TraceSegment d = synth_segment(vac, cfg2, 3);
  CHECK(a.codes != d.codes);
}

TEST_CASE("vacuum trace gives <x^2> = 1/2 through a normalized mode") {
  const SpectralState vac = uniform_state(0.0, 0.0, 0.0, 4e6, 16e9);
  const SynthConfig cfg = small_cfg(7);
  const DiscreteKernel k = mode_kernel(4e9);
  const CumulantPair c = analyze_stream(vac, cfg, 8, k);
  CHECK(std::abs(c.c2 - 0.5) < 6.0 * std::max(c.c2_err, 1e-4));
  CHECK(std::abs(c.c2 - 0.5) < 0.01);
}

TEST_CASE("synthesized spectral density matches (Z h f / 2)(2 n + 1) per bin") {
  // Shaped state: n = 2 on [3,5) GHz, vacuum elsewhere.
  const SpectralState st = uniform_state(2.0, 3e9, 5e9, 4e6, 16e9);
  SynthConfig cfg = small_cfg(21);
  cfg.segment_samples = 1 << 18;
  const uint64_t n = cfg.segment_samples;
  const double df = cfg.sample_rate / double(n);
  const int n_seg = 40;
  std::vector<double> psd(n / 2 + 1, 0.0);
  RealFft fft(n);
  for (int s = 0; s < n_seg; ++s) {
    const TraceSegment seg = synth_segment(st, cfg, s);
    const auto v = seg.decode();
    for (uint64_t i = 0; i < n; ++i) fft.time()[i] = v[i];
    fft.forward();
    for (std::size_t q = 0; q <= n / 2; ++q) {
      psd[q] += 2.0 * std::norm(fft.freq()[q]) / (double(n) * double(n) * df);
    }
  }
  for (auto& p : psd) p /= n_seg;
  auto band_mean = [&](double f0) {
    const auto q0 = static_cast<std::size_t>(f0 / df);
    double s = 0.0;
    for (std::size_t q = q0 - 128; q < q0 + 128; ++q) s += psd[q];
    return s / 256.0;
  };
  const double z = cfg.impedance;
  const double in_band = band_mean(4e9);
  const double expect_in = z * kPlanck * 4e9 / 2.0 * (2.0 * 2.0 + 1.0);
  CHECK(in_band == doctest::Approx(expect_in).epsilon(0.03));
  const double out_band = band_mean(8e9);
  const double expect_out = z * kPlanck * 8e9 / 2.0;
  CHECK(out_band == doctest::Approx(expect_out).epsilon(0.03));
}

TEST_CASE("thermal state: n recovered and Fano = n + 1") {
  const SpectralState th = uniform_state(1.0, 3e9, 9e9, 4e6, 16e9);
  const SynthConfig cfg = small_cfg(31);
  const DiscreteKernel k = mode_kernel(4e9);
  const CumulantPair c = analyze_stream(th, cfg, 16, k);
  const PhotonStats st = photon_stats(c);
  CHECK(std::abs(st.n - 1.0) < 5.0 * st.n_err);
  CHECK(std::abs(st.n - 1.0) < 0.03);
  CHECK(std::abs(st.fano - 2.0) < 5.0 * std::max(st.fano_err, 1e-3));
  CHECK(std::abs(st.var_n - 2.0) < 0.1);
}

TEST_CASE("quadrature stream of a Gaussian source has no fourth cumulant") {
  const SpectralState th = uniform_state(0.8, 3e9, 9e9, 4e6, 16e9);
  const SynthConfig cfg = small_cfg(41);
  const DiscreteKernel k = mode_kernel(5e9);
  const CumulantPair c = analyze_stream(th, cfg, 12, k);
  CHECK(std::abs(c.c4) < 5.0 * std::max(c.c4_err, 1e-4));
}

TEST_CASE("paired state reproduces var_n = n(n+1) + m^2 near -1.6 dB") {
  const double n = 0.0292, m = 0.183;
  const SpectralState sq = uniform_state(n, 5e9, 7e9, 4e6, 16e9, m, 12e9);
  const SynthConfig cfg = small_cfg(51);
  const DiscreteKernel k = mode_kernel(6e9);
  const CumulantPair c = analyze_stream(sq, cfg, 24, k);
  const PhotonStats st = photon_stats(c);
  CHECK(std::abs(st.n - n) < 5.0 * std::max(st.n_err, 1e-4));
  const double expect_var = n * (n + 1.0) + m * m;
  CHECK(std::abs(st.var_n - expect_var) < 5.0 * std::max(st.var_n_err, 1e-4));
  const SqueezingEstimate sqz = m_and_variances(st);
  CHECK(std::abs(sqz.m - m) < 5.0 * std::max(sqz.m_err, 2e-3));
  CHECK(std::abs(sqz.squeezing_db - (-1.6)) < 0.75);
}

TEST_CASE("pure pair emission doubles the thermal Fano factor") {
  const double n = 0.4;
  const double m = std::sqrt(n * (n + 1.0));  // pure two-mode squeezed vacuum
  const SpectralState sq = uniform_state(n, 5e9, 7e9, 4e6, 16e9, m, 12e9);
  const SynthConfig cfg = small_cfg(61);
  const DiscreteKernel k = mode_kernel(6e9);
  const PhotonStats st = photon_stats(analyze_stream(sq, cfg, 16, k));
  const double fano_thermal = n + 1.0;
  CHECK(st.fano == doctest::Approx(2.0 * fano_thermal).epsilon(0.05));
}

TEST_CASE("unphysical pair amplitude rejected at synthesis") {
  CHECK_THROWS_AS(uniform_state(0.1, 5e9, 7e9, 4e6, 16e9, 1.0, 12e9),
                  PhysicalityError);
}

TEST_CASE("flat chain with 16-bit ADC is transparent to the statistics") {
  const SpectralState th = uniform_state(1.0, 3.5e9, 4.5e9, 4e6, 16e9);
  SynthConfig cfg = small_cfg(71);
  ChainModel chain;
  chain.gain_db = FrequencyCurve(20.0);  // flat 20 dB power gain
  chain.adc_bits = 16;
  TraceSegment probe = synth_segment(th, cfg, 0);
  chain.adc_fullscale = 10.0 * probe.scale * 32767.0;
  KernelConfig kc;
  kc.sample_rate = 32e9;
  kc.n_taps = 257;
  kc.impedance = 50.0;
  const ModeSpec mode =
      make_monochromatic(4e9, 200e6, SubbandShape::Rect, 32e9 / 257);
  Eigen::ArrayXd inv_gain(mode.values.size());
  for (int j = 0; j < mode.bin_count(); ++j) {
    inv_gain[j] = chain.inverse_amplitude_gain(mode.freq(j));
  }
  const DiscreteKernel k = compose(mode, kc, inv_gain);
  SynthSource source(th, cfg, 12, chain);
  const AnalysisOutput out = run_analysis(source, {&k}, {}, {});
  const PhotonStats st = photon_stats(out.streams[0].cumulants);
  CHECK(std::abs(st.n - 1.0) < 5.0 * std::max(st.n_err, 1e-3));
  CHECK(std::abs(st.fano - 2.0) < 0.1);
}

TEST_CASE("cubic ADC nonlinearity manufactures a spurious fourth cumulant") {
  const SpectralState th = uniform_state(3.0, 2e9, 10e9, 4e6, 16e9);
  SynthConfig cfg = small_cfg(81);
  TraceSegment probe = synth_segment(th, cfg, 0);
  const double sigma = probe.scale * 32767.0 / cfg.store_sigma_headroom;
  ChainModel clean, bent;
  clean.adc_bits = bent.adc_bits = 10;
  clean.adc_fullscale = bent.adc_fullscale = 6.0 * sigma;
  bent.adc_epsilon = 0.5;
  const DiscreteKernel k = mode_kernel(6e9);
  SynthSource s_clean(th, cfg, 8, clean);
  SynthSource s_bent(th, cfg, 8, bent);
  const CumulantPair c_clean =
      run_analysis(s_clean, {&k}, {}, {}).streams[0].cumulants;
  const CumulantPair c_bent =
      run_analysis(s_bent, {&k}, {}, {}).streams[0].cumulants;
  CHECK(std::abs(c_clean.c4) < 6.0 * std::max(c_clean.c4_err, 1e-4));
  CHECK(c_bent.c4 > 10.0 * std::max(c_bent.c4_err, 1e-4));
}

TEST_CASE("clipping fraction above 1% raises the warning flag") {
  const SpectralState th = uniform_state(5.0, 2e9, 10e9, 4e6, 16e9);
  SynthConfig cfg = small_cfg(91);
  cfg.segment_samples = 1 << 16;
  TraceSegment seg = synth_segment(th, cfg, 0);
  const double sigma = seg.scale * 32767.0 / cfg.store_sigma_headroom;
  ChainModel chain;
  chain.adc_bits = 10;
  chain.adc_fullscale = 1.5 * sigma;  // distribution too wide for the ADC
  const ChainReport rep = apply_chain(seg, chain, 5);
  CHECK(rep.clip_fraction() > 0.01);
  CHECK(rep.warn());
  TraceSegment seg2 = synth_segment(th, cfg, 1);
  ChainModel wide = chain;
  wide.adc_fullscale = 8.0 * sigma;
  CHECK_FALSE(apply_chain(seg2, wide, 5).warn());
}

TEST_CASE("trace file round-trip preserves bytes and headers") {
  const SpectralState vac = uniform_state(0.0, 0.0, 0.0, 4e6, 16e9);
  SynthConfig cfg = small_cfg(101);
  cfg.segment_samples = 1 << 16;
  const std::string path = "/tmp/bbpc_test_trace.bbt";
  const uint64_t total = synth_to_file(path, vac, cfg, 3);
  CHECK(total == 3 * cfg.segment_samples);
  TraceReader reader(path);
  CHECK(reader.header().sample_rate == cfg.sample_rate);
  CHECK(reader.header().segment_len == cfg.segment_samples);
  CHECK(reader.segment_count() == 3);
  const TraceSegment direct = synth_segment(vac, cfg, 1);
  const TraceSegment from_file = reader.read_segment(1);
  CHECK(direct.codes == from_file.codes);
  CHECK(from_file.scale == doctest::Approx(direct.scale));
}
