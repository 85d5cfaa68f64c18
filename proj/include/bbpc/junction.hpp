#pragma once

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <vector>

#include "bbpc/modes.hpp"

namespace bbpc {

// ac+dc biased tunnel junction.
struct JunctionModel {
  double resistance = 52.5;      // ohms
  double electron_temp = 17e-3;  // K
  double v_dc = 0.0;             // volts
  double i_ac_rms = 0.0;         // amperes, drive at f_pump
  double f_pump = 12e9;          // Hz

  // Photoassisted parameter z = e V_ac,peak / (h f_pump), V_ac,peak =
  // sqrt(2) I_ac,rms R.
  double photoassisted_z() const;
};

// Symmetrized two-sided current noise spectral density, A^2/Hz:
// S2 = (1/2R) sum_{+-} (eV +- hf) coth((eV +- hf)/(2 k Te)),
// with the 0/0 limit 2 k Te per term.
double s2_density(double f, double v, const JunctionModel& model);

// Mean photon occupancy of a 1 Hz mode at f. For z = 0 this is
// S2(f, Vdc) R/(2hf) - 1/2 (Bose-Einstein at equilibrium); for z > 0 the
// Bessel-weighted photoassisted sum over voltage sidebands.
double occupancy(double f, const JunctionModel& model);

// Pair correlator m_bar(f) = <a(f) a(f_pump - f)> between the two sidebands
// of the pump. Real in this convention; zero when z = 0. Requires
// 0 < f < f_pump.
double pair_correlator(double f, const JunctionModel& model);

// Gaussian source description on a uniform frequency grid f_j = j df.
struct SpectralState {
  double grid_spacing = 0.0;
  Eigen::ArrayXd n_bar;    // occupancy per mode
  Eigen::ArrayXcd m_bar;   // pair correlator with the partner at f_pump - f
  double f_pump = 0.0;     // 0 disables pairing

  double max_freq() const { return (n_bar.size() - 1) * grid_spacing; }
  double n_at(double f) const;                  // linear interpolation
  std::complex<double> m_at(double f) const;

  // Throws PhysicalityError if |m|^2 exceeds n(f) (n(fp-f)+1) anywhere.
  void validate() const;
};

// Uniform state with constant occupancy (and optionally constant pair
// amplitude) on [f_lo, f_hi); vacuum elsewhere.
SpectralState uniform_state(double n, double f_lo, double f_hi,
                            double grid_spacing, double f_max,
                            double m = 0.0, double f_pump = 0.0);

// Junction state sampled on a grid up to f_max, restricted to the band
// [band_lo, band_hi) (vacuum outside).
SpectralState junction_state(const JunctionModel& model, double grid_spacing,
                             double f_max, double band_lo, double band_hi);

// phi(f) = alpha (f - f_ref)^2; linear phase is a pure delay and is excluded.
struct DispersionModel {
  double alpha = 0.0;  // rad / Hz^2
  double f_ref = 0.0;
  double phase(double f) const { return alpha * (f - f_ref) * (f - f_ref); }
  // alpha chosen so the phase grows by total_radians between f_lo and f_hi.
  static DispersionModel from_total_rotation(double total_radians, double f_lo,
                                             double f_hi);
};

struct ModePrediction {
  double n = 0.0;
  double m = 0.0;        // >= 0, global phase chosen so <b^2> is real positive
  double v_minus = 0.5;  // n + 1/2 - m
  double v_plus = 0.5;
};

// Analytic photon statistics of a mode over a state:
// n = int |beta|^2 n_bar df,
// m = | int beta(f) beta(fp-f) e^{i[phi(f)+phi(fp-f)]} m_bar(f) df |.
ModePrediction predict(const ModeSpec& mode, const SpectralState& state,
                       const DispersionModel& dispersion = {});

struct EffectiveFrequencyPoint {
  double i_dc = 0.0;
  double f_eff = 0.0;  // (f1 n1 + f2 n2) / (n1 + n2)
};

// <H>/(h<N>) for a bichromatic pair vs dc bias. Points where both occupancies
// vanish are omitted.
std::vector<EffectiveFrequencyPoint> effective_frequency(
    const JunctionModel& base, const std::vector<double>& i_dc, double f1,
    double f2);

// CSV rows (f, n_bar, Re m_bar, Im m_bar).
void write_state_csv(const SpectralState& s, std::ostream& os);
SpectralState read_state_csv(std::istream& is, double f_pump);

} // namespace bbpc
