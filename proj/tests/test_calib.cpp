#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bbpc/calib.hpp"
#include "bbpc/constants.hpp"
#include "bbpc/errors.hpp"
#include "bbpc/junction.hpp"
#include "bbpc/quantum.hpp"
#include "bbpc/rng.hpp"

using namespace bbpc;

namespace {

// Synthetic measured spectra from a known chain.
std::vector<PsdPoint> synth_spectra(double te, double r,
                                    const std::vector<double>& freqs,
                                    const std::vector<double>& gains_db,
                                    const std::vector<double>& tn,
                                    double noise_rel, uint64_t seed) {
  JunctionModel m;
  m.resistance = r;
  m.electron_temp = te;
  std::vector<PsdPoint> out;
  Xoshiro256 rng(seed);
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const double a = std::pow(10.0, gains_db[k] / 10.0);
    const double b = a * 2.0 * kBoltzmann * tn[k] / r;
    // Dense sampling through the thermal-to-shot crossover (the kink sits
    // near e V ~ h f, i.e. fractions of a microamp at these parameters).
    for (double i_ua : {0.0,  0.05, -0.05, 0.1, -0.1, 0.2,  -0.2, 0.35,
                        -0.35, 0.5, -0.5,  0.8, -0.8, 1.2,  -1.2, 2.0,
                        -2.0,  3.5, -3.5,  6.0, -6.0, 12.0, -12.0, 24.0,
                        -24.0}) {
      const double i = i_ua * 1e-6;
      PsdPoint p;
      p.f = freqs[k];
      p.i_dc = i;
      p.psd = a * s2_density(p.f, i * r, m) + b;
      if (noise_rel > 0.0) p.psd *= 1.0 + noise_rel * rng.normal();
      out.push_back(p);
    }
  }
  return out;
}

} // namespace

TEST_CASE("thermometry round-trip recovers Te, gain, and noise temperature") {
  const double te = 17.4e-3, r = 52.5;
  const std::vector<double> freqs{2e9, 4e9, 6e9, 8e9, 10e9};
  const std::vector<double> gains{92.0, 93.5, 95.0, 94.0, 91.0};
  const std::vector<double> tn{7.0, 5.5, 5.0, 6.0, 9.0};
  const auto spectra = synth_spectra(te, r, freqs, gains, tn, 2e-5, 3);
  const CalibResult res = fit_thermometry(spectra, r);
  CHECK(std::abs(res.te - te) / te < 0.02);
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    CHECK(std::abs(res.bins[k].gain_db - gains[k]) < 0.1);
    CHECK(std::abs(res.bins[k].noise_temp - tn[k]) / tn[k] < 0.05);
  }
}

TEST_CASE("noiseless synthetic data fits to machine-level residuals") {
  const double te = 17.4e-3, r = 52.5;
  const auto spectra =
      synth_spectra(te, r, {3e9, 7e9}, {90.0, 92.0}, {5.0, 6.0}, 0.0, 1);
  const CalibResult res = fit_thermometry(spectra, r);
  double scale = 0.0;
  for (const auto& p : spectra) scale = std::max(scale, p.psd);
  CHECK(res.residual_rms / scale < 1e-10);
  CHECK(std::abs(res.te - te) / te < 1e-4);
  // Per-bin temperatures agree (paper-like: almost frequency independent).
  for (const auto& b : res.bins) {
    CHECK(std::abs(b.te_local - te) / te < 1e-3);
  }
}

TEST_CASE("per-bin Te scatter on paper-like noisy data is sub-mK") {
  const double te = 17.4e-3, r = 52.5;
  const std::vector<double> freqs{2e9, 4e9, 6e9, 8e9, 10e9};
  const auto spectra = synth_spectra(te, r, freqs, {93, 93, 93, 93, 93},
                                     {6, 6, 6, 6, 6}, 1e-4, 7);
  const CalibResult res = fit_thermometry(spectra, r);
  for (const auto& b : res.bins) {
    CHECK(std::abs(b.te_local - te) < 1.5e-3);
  }
}

TEST_CASE("fit is scale-consistent") {
  const double te = 17.4e-3, r = 52.5;
  auto spectra =
      synth_spectra(te, r, {3e9, 7e9}, {90.0, 92.0}, {5.0, 6.0}, 0.0, 1);
  const CalibResult base = fit_thermometry(spectra, r);
  for (auto& p : spectra) p.psd *= 4.0;
  const CalibResult scaled = fit_thermometry(spectra, r);
  CHECK(scaled.te == doctest::Approx(base.te).epsilon(1e-6));
  for (std::size_t k = 0; k < base.bins.size(); ++k) {
    CHECK(scaled.bins[k].gain_db ==
          doctest::Approx(base.bins[k].gain_db + 10.0 * std::log10(4.0))
              .epsilon(1e-6));
    CHECK(scaled.bins[k].noise_temp ==
          doctest::Approx(base.bins[k].noise_temp).epsilon(1e-4));
  }
}

TEST_CASE("narrow bias range and degenerate inputs rejected") {
  const double te = 17.4e-3, r = 52.5;
  // Zero-bias-only: crossover unobserved.
  JunctionModel m;
  m.resistance = r;
  m.electron_temp = te;
  std::vector<PsdPoint> flat;
  for (double f : {3e9, 7e9}) {
    for (int k = 0; k < 9; ++k) {
      flat.push_back({f, 0.0, s2_density(f, 0.0, m)});
    }
  }
  CHECK_THROWS_AS(fit_thermometry(flat, r), ConfigError);
  // One frequency bin only.
  std::vector<PsdPoint> one_bin;
  for (double i_ua = -24.0; i_ua <= 24.1; i_ua += 2.0) {
    one_bin.push_back({4e9, i_ua * 1e-6, s2_density(4e9, i_ua * 1e-6 * r, m)});
  }
  CHECK_THROWS_AS(fit_thermometry(one_bin, r), ConfigError);
  // Too few bias points per bin.
  std::vector<PsdPoint> sparse;
  for (double f : {3e9, 7e9}) {
    for (double i_ua = -20.0; i_ua <= 20.1; i_ua += 10.0) {
      sparse.push_back({f, i_ua * 1e-6, s2_density(f, i_ua * 1e-6 * r, m)});
    }
  }
  CHECK_THROWS_AS(fit_thermometry(sparse, r), ConfigError);
}

TEST_CASE("interlace plan alternates references with conditions") {
  const auto plan = interlace_plan(3, 1);
  // R c1 R c2 R c3 R
  REQUIRE(plan.size() == 7);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    CHECK(plan[i].is_reference == (i % 2 == 0));
  }
  CHECK(plan[1].condition == 0);
  CHECK(plan[3].condition == 1);
  CHECK(plan[5].condition == 2);
  CHECK(interlace_plan(0, 1).empty());
  CHECK_THROWS_AS(interlace_plan(3, 0), ConfigError);
  // ref_period 2: R c1 c2 R c3 R.
  const auto plan2 = interlace_plan(3, 2);
  REQUIRE(plan2.size() == 6);
  CHECK(plan2[0].is_reference);
  CHECK_FALSE(plan2[1].is_reference);
  CHECK_FALSE(plan2[2].is_reference);
  CHECK(plan2[3].is_reference);
}

TEST_CASE("interlacing cancels slow amplifier drift; a fixed reference does not") {
  // Cumulant-level simulation: C2 acquisitions with a drifting amplifier
  // occupancy; conditions carry a constant sample occupancy n = 1.
  const double n_sample = 1.0;
  const int n_cond = 40;
  const auto plan = interlace_plan(n_cond, 1);
  const double amp0 = 25.0, drift = 0.5;  // slow sinusoid, huge vs n_err
  auto amp_at = [&](double t) {
    return amp0 + drift * std::sin(2.0 * kPi * t / plan.size() * 1.7);
  };
  std::vector<double> ref_c2;
  std::vector<double> cond_c2;
  std::vector<double> cond_time;
  for (std::size_t t = 0; t < plan.size(); ++t) {
    const double c2 = amp_at(t) + 0.5 + (plan[t].is_reference ? 0.0 : n_sample);
    if (plan[t].is_reference) {
      ref_c2.push_back(c2);
    } else {
      cond_c2.push_back(c2);
      cond_time.push_back(static_cast<double>(t));
    }
  }
  // Interlaced: subtract the mean of the two adjacent references.
  double worst_interlaced = 0.0, worst_fixed = 0.0;
  for (std::size_t k = 0; k < cond_c2.size(); ++k) {
    CumulantPair cond;
    cond.c2 = cond_c2[k];
    cond.count = 1;
    CumulantPair ref;
    ref.c2 = 0.5 * (ref_c2[k] + ref_c2[k + 1]);
    ref.count = 1;
    const double n_hat = photon_stats(reference_subtract(cond, ref)).n;
    worst_interlaced = std::max(worst_interlaced, std::abs(n_hat - n_sample));
    CumulantPair fixed;
    fixed.c2 = ref_c2.front();
    fixed.count = 1;
    const double n_fixed = photon_stats(reference_subtract(cond, fixed)).n;
    worst_fixed = std::max(worst_fixed, std::abs(n_fixed - n_sample));
  }
  CHECK(worst_interlaced < 0.02);   // second difference of the drift
  CHECK(worst_fixed > 0.2);         // systematic offset survives
}

TEST_CASE("PSD csv round-trip") {
  std::ostringstream os;
  os << "f,i_dc,psd\n1e9,0.0,2.5e-22\n1e9,1e-6,3.5e-22\n";
  std::istringstream is(os.str());
  const auto rows = read_psd_csv(is);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].i_dc == doctest::Approx(1e-6));
  CHECK(rows[1].psd == doctest::Approx(3.5e-22));
}
