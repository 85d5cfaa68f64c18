#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bbpc/constants.hpp"
#include "bbpc/errors.hpp"
#include "bbpc/junction.hpp"
#include "bbpc/rng.hpp"
#include "oracles.hpp"

using namespace bbpc;

namespace {

JunctionModel paper_model() {
  JunctionModel m;
  m.resistance = 52.5;
  m.electron_temp = 17e-3;
  m.f_pump = 12e9;
  m.v_dc = kPlanck * m.f_pump / (2.0 * kElementaryCharge);
  m.i_ac_rms = 0.43e-6;
  return m;
}

} // namespace

TEST_CASE("s2 limits: vacuum, Johnson-Nyquist, shot noise") {
  JunctionModel m;
  m.resistance = 50.0;
  m.electron_temp = 1e-6;  // effectively zero
  const double f = 5e9;
  // V=0, T->0: S2 -> h f / R (zero-point).
  CHECK(s2_density(f, 0.0, m) ==
        doctest::Approx(kPlanck * f / m.resistance).epsilon(1e-6));
  // V=0, kT >> hf: Johnson-Nyquist 2 k T / R.
  m.electron_temp = 10.0;
  CHECK(s2_density(1e6, 0.0, m) ==
        doctest::Approx(2.0 * kBoltzmann * 10.0 / 50.0).epsilon(1e-6));
  // e|V| >> hf, kT: Poissonian e I.
  m.electron_temp = 10e-3;
  const double v = 1e-3;
  CHECK(s2_density(f, v, m) ==
        doctest::Approx(kElementaryCharge * v / 50.0).epsilon(1e-3));
}

TEST_CASE("equilibrium occupancy is Bose-Einstein at every f, Te") {
  JunctionModel m;
  m.resistance = 75.0;
  for (double te : {5e-3, 17e-3, 4.2}) {
    m.electron_temp = te;
    for (double f : {1e9, 4e9, 9.9e9}) {
      const double expect = 1.0 / std::expm1(kPlanck * f / (kBoltzmann * te));
      CHECK(occupancy(f, m) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("occupancy is even in Vdc and flat-then-linear in bias") {
  JunctionModel m = paper_model();
  m.i_ac_rms = 0.0;
  JunctionModel neg = m;
  neg.v_dc = -m.v_dc;
  CHECK(occupancy(4e9, m) == doctest::Approx(occupancy(4e9, neg)));
  // Fig-3-inset shape: flat near zero bias, linear in the shot regime, and
  // the linear extrapolation to zero bias lands 1/2 photon below the
  // occupancy-plus-half line.
  JunctionModel sweep = m;
  const double f = 4e9;
  sweep.v_dc = 0.0;
  const double n0 = occupancy(f, sweep);
  sweep.v_dc = 20e-9 * m.resistance;  // e V << h f: thermal plateau
  const double n_small = occupancy(f, sweep);
  CHECK(std::abs(n_small - n0) < 1e-3);  // flat region
  const double i1 = 60e-6, i2 = 120e-6;
  sweep.v_dc = i1 * m.resistance;
  const double na = occupancy(f, sweep);
  sweep.v_dc = i2 * m.resistance;
  const double nb = occupancy(f, sweep);
  const double slope = (nb - na) / (i2 - i1);
  const double intercept = na - slope * i1;
  // e I R / (2 h f) slope; intercept -1/2 marks the vacuum offset.
  CHECK(slope == doctest::Approx(kElementaryCharge * m.resistance /
                                 (2.0 * kPlanck * f))
                     .epsilon(1e-3));
  CHECK(intercept == doctest::Approx(-0.5).epsilon(2e-2));
}

TEST_CASE("photoassisted occupancy is continuous at z -> 0") {
  JunctionModel m = paper_model();
  m.i_ac_rms = 0.0;
  const double n_dc = occupancy(5e9, m);
  m.i_ac_rms = 1e-12;
  CHECK(std::abs(occupancy(5e9, m) - n_dc) < 1e-9);
}

TEST_CASE("Bessel weights are a partition of unity") {
  // sum_n J_n^2(z) = 1: the photoassisted sum is a convex combination.
  for (double z : {0.3, 0.64, 2.0, 5.0}) {
    double s = 0.0;
    for (int n = -40; n <= 40; ++n) {
      const double j = std::cyl_bessel_j(std::abs(n), z);
      s += j * j;
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("pair correlator vanishes without drive and is symmetric") {
  JunctionModel m = paper_model();
  m.i_ac_rms = 0.0;
  CHECK(pair_correlator(4e9, m) == 0.0);
  m.i_ac_rms = 0.43e-6;
  for (double f : {2e9, 4.25e9, 5.5e9}) {
    CHECK(pair_correlator(f, m) ==
          doctest::Approx(pair_correlator(m.f_pump - f, m)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(pair_correlator(13e9, m), ConfigError);
}

TEST_CASE("paper anchor: -1.6 +- 0.5 dB squeezing at 6 GHz") {
  JunctionModel m = paper_model();
  const double n = occupancy(6e9, m);
  const double mm = pair_correlator(6e9, m);
  const double v_minus = n + 0.5 - mm;
  const double db = 10.0 * std::log10(v_minus / 0.5);
  CHECK(db > -2.1);
  CHECK(db < -1.1);
}

TEST_CASE("physicality bound holds at random parameter points") {
  Xoshiro256 rng(77);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    JunctionModel m;
    m.resistance = 20.0 + 80.0 * rng.uniform_pos();
    m.electron_temp = 5e-3 + 50e-3 * rng.uniform_pos();
    m.f_pump = 12e9;
    m.v_dc = (rng.uniform_pos() * 2.0) * kPlanck * m.f_pump / kElementaryCharge;
    m.i_ac_rms = rng.uniform_pos() * 1.5e-6;
    const double f = 0.5e9 + rng.uniform_pos() * 11e9;
    const double n1 = occupancy(f, m);
    const double n2 = occupancy(m.f_pump - f, m);
    const double mm = std::abs(pair_correlator(f, m));
    const double bound = std::min(n1 * (n2 + 1.0), n2 * (n1 + 1.0));
    CHECK(mm * mm <= bound * (1.0 + 1e-9) + 1e-12);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("junction state validates physicality and feeds predict") {
  JunctionModel m = paper_model();
  const SpectralState s = junction_state(m, 2e6, 16e9, 1e9, 11e9);
  CHECK(s.n_at(6e9) == doctest::Approx(occupancy(6e9, m)).epsilon(1e-6));
  CHECK(std::abs(s.m_at(6e9)) ==
        doctest::Approx(pair_correlator(6e9, m)).epsilon(1e-6));
  // Bins outside the band are vacuum.
  CHECK(s.n_at(0.5e9) == 0.0);
}

TEST_CASE("predict: thermal state gives m = 0 and V = n + 1/2") {
  const SpectralState th = uniform_state(1.5, 3e9, 9e9, 1e6, 16e9);
  const ModeSpec mode = make_monochromatic(4e9, 200e6, SubbandShape::Rect, 1e6);
  const ModePrediction p = predict(mode, th);
  CHECK(p.n == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(p.m == 0.0);
  CHECK(p.v_minus == doctest::Approx(2.0));
  CHECK(p.v_plus == doctest::Approx(2.0));
}

TEST_CASE("lambda-weighted pair amplitude: oracle pins the prefactor") {
  // The combined mode d = sqrt(1-l) a1 + sqrt(l) a2 over a state with pair
  // correlator mt between the arms has <dd> = 2 sqrt(l(1-l)) mt; the photon
  // variance follows the full Wick enumeration. This pins the lambda
  // prefactor at 2 (not 4): at l = 1/2 the pair amplitude equals mt.
  const double n1 = 0.35, n2 = 0.07, mt = 0.26;
  for (double lambda : {0.0, 0.2, 0.5, 0.74, 1.0}) {
    Eigen::MatrixXcd nm = Eigen::MatrixXcd::Zero(2, 2);
    nm(0, 0) = n1;
    nm(1, 1) = n2;
    Eigen::MatrixXcd mm = Eigen::MatrixXcd::Zero(2, 2);
    mm(0, 1) = mt;
    mm(1, 0) = mt;
    Eigen::VectorXcd coeff(2);
    coeff << std::sqrt(1.0 - lambda), std::sqrt(lambda);
    const auto wick = oracle::combined_mode_stats(nm, mm, coeff);
    const double expected_pair = 2.0 * std::sqrt(lambda * (1.0 - lambda)) * mt;
    CHECK(std::abs(wick.pair) == doctest::Approx(expected_pair).epsilon(1e-12));
    CHECK(wick.var_n ==
          doctest::Approx(wick.n * (wick.n + 1.0) + expected_pair * expected_pair)
              .epsilon(1e-12));
  }
}

TEST_CASE("predict matches the Wick oracle for lambda-weighted modes") {
  JunctionModel jm = paper_model();
  const double f1 = 4.25e9, f2 = 7.75e9;
  const double df = 1e6;
  const SpectralState state = junction_state(jm, df, 16e9, 1e9, 11e9);
  const double n1 = occupancy(f1, jm);
  const double n2 = occupancy(f2, jm);
  const double mt = pair_correlator(f1, jm);
  for (double lambda : {0.3, 0.5, 0.8}) {
    const ModeSpec mode = make_bichromatic(f1, f2, 200e6, lambda, 0.0,
                                           SubbandShape::Rect, df);
    const ModePrediction p = predict(mode, state);
    Eigen::MatrixXcd nm = Eigen::MatrixXcd::Zero(2, 2);
    nm(0, 0) = n1;
    nm(1, 1) = n2;
    Eigen::MatrixXcd mm = Eigen::MatrixXcd::Zero(2, 2);
    mm(0, 1) = mt;
    mm(1, 0) = mt;
    Eigen::VectorXcd coeff(2);
    coeff << std::sqrt(1.0 - lambda), std::sqrt(lambda);
    const auto wick = oracle::combined_mode_stats(nm, mm, coeff);
    // The 200 MHz band averages n_bar and m_bar slightly; 1% agreement.
    CHECK(p.n == doctest::Approx(wick.n).epsilon(0.01));
    CHECK(p.m == doctest::Approx(std::abs(wick.pair)).epsilon(0.01));
  }
}

TEST_CASE("quadratic dispersion hurts wideband pairs more than bichromatic") {
  JunctionModel jm = paper_model();
  const double df = 1e6;
  const SpectralState state = junction_state(jm, df, 16e9, 1e9, 11e9);
  const DispersionModel disp =
      DispersionModel::from_total_rotation(5.0 * kPi, 1e9, 10e9);
  const ModeSpec bich = make_bichromatic(4e9, 8e9, 200e6, 0.5, 0.0,
                                         SubbandShape::Rect, df);
  const ModeSpec wide = make_wideband(3.5e9, 8.5e9, df);
  const double m_b0 = predict(bich, state).m;
  const double m_b1 = predict(bich, state, disp).m;
  const double m_w0 = predict(wide, state).m;
  const double m_w1 = predict(wide, state, disp).m;
  CHECK(std::abs(m_b1 / m_b0 - 1.0) < 0.01);
  CHECK(m_w1 / m_w0 < 0.9);
}

TEST_CASE("effective frequency runs from f1 to the harmonic mean") {
  JunctionModel m = paper_model();
  m.i_ac_rms = 0.0;
  std::vector<double> bias;
  for (double i = 0.0; i <= 200e-6; i += 5e-6) bias.push_back(i);
  const auto curve = effective_frequency(m, bias, 4.25e9, 7.75e9);
  REQUIRE(curve.size() >= 10);
  // Low bias: the thermally dominant lower mode.
  CHECK(curve.front().f_eff == doctest::Approx(4.25e9).epsilon(1e-3));
  // High bias: 2 f1 f2 / (f1 + f2) = 5.49 GHz.
  const double harmonic = 2.0 * 4.25e9 * 7.75e9 / (4.25e9 + 7.75e9);
  CHECK(curve.back().f_eff == doctest::Approx(harmonic).epsilon(2e-3));
  // Degenerate pair: constant f1.
  const auto flat = effective_frequency(m, {0.0, 1e-6, 1e-4}, 5e9, 5e9);
  for (const auto& p : flat) CHECK(p.f_eff == 5e9);
}

TEST_CASE("spectral state CSV round-trip") {
  JunctionModel m = paper_model();
  const SpectralState s = junction_state(m, 250e6, 16e9, 1e9, 11e9);
  std::ostringstream os;
  write_state_csv(s, os);
  std::istringstream is(os.str());
  const SpectralState back = read_state_csv(is, m.f_pump);
  CHECK(back.grid_spacing == doctest::Approx(s.grid_spacing));
  CHECK(back.n_at(6e9) == doctest::Approx(s.n_at(6e9)).epsilon(1e-9));
}

TEST_CASE("unphysical pair correlator rejected loudly") {
  SpectralState s;
  s.grid_spacing = 1e9;
  s.f_pump = 12e9;
  s.n_bar = Eigen::ArrayXd::Constant(17, 0.1);
  s.m_bar = Eigen::ArrayXcd::Constant(17, 5.0);
  CHECK_THROWS_AS(s.validate(), PhysicalityError);
}
