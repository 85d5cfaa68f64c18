#include "bbpc/junction.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "bbpc/constants.hpp"
#include "bbpc/errors.hpp"

namespace bbpc {

namespace {

// x coth(x / (2 k T)), with the 2kT limit at x -> 0.
double coth_factor(double x, double temp) {
  const double denom = 2.0 * kBoltzmann * temp;
  const double a = x / denom;
  if (std::abs(a) < 1e-8) return denom * (1.0 + a * a / 3.0);
  return x / std::tanh(a);
}

int bessel_order_cut(double z) {
  return std::max(12, static_cast<int>(std::ceil(3.0 * z)) + 8);
}

double bessel_j(int n, double z) {
  // std::cyl_bessel_j requires a non-negative argument.
  double v = std::cyl_bessel_j(static_cast<double>(std::abs(n)), std::abs(z));
  if (n < 0 && (n & 1)) v = -v;
  if (z < 0 && (n & 1)) v = -v;
  return v;
}

} // namespace

double JunctionModel::photoassisted_z() const {
  const double v_ac_peak = i_ac_rms * resistance * std::sqrt(2.0);
  return kElementaryCharge * v_ac_peak / (kPlanck * f_pump);
}

double s2_density(double f, double v, const JunctionModel& model) {
  const double ev = kElementaryCharge * v;
  const double hf = kPlanck * f;
  return (coth_factor(ev + hf, model.electron_temp) +
          coth_factor(ev - hf, model.electron_temp)) /
         (2.0 * model.resistance);
}

double occupancy(double f, const JunctionModel& model) {
  if (!(f > 0.0)) throw ConfigError("occupancy requires f > 0");
  const double z = model.photoassisted_z();
  const double to_photons = model.resistance / (2.0 * kPlanck * f);
  if (z == 0.0) {
    return s2_density(f, model.v_dc, model) * to_photons - 0.5;
  }
  const int n_cut = bessel_order_cut(z);
  const double v_quantum = kPlanck * model.f_pump / kElementaryCharge;
  double s = 0.0;
  for (int n = -n_cut; n <= n_cut; ++n) {
    const double jn = bessel_j(n, z);
    s += jn * jn * s2_density(f, model.v_dc - n * v_quantum, model);
  }
  return s * to_photons - 0.5;
}

double pair_correlator(double f, const JunctionModel& model) {
  if (!(f > 0.0) || !(f < model.f_pump)) {
    throw ConfigError("pair_correlator requires 0 < f < f_pump");
  }
  const double z = model.photoassisted_z();
  if (z == 0.0) return 0.0;
  const int n_cut = bessel_order_cut(z);
  const double v_quantum = kPlanck * model.f_pump / kElementaryCharge;
  // Current correlator between f and f_pump - f: the drive mixes the dc noise
  // at half-integer sideband voltages with adjacent Bessel weights.
  double x = 0.0;
  for (int l = -n_cut; l <= n_cut; ++l) {
    x += bessel_j(l, z) * bessel_j(l + 1, z) *
         s2_density(f - model.f_pump / 2.0,
                    model.v_dc + (l + 0.5) * v_quantum, model);
  }
  const double partner = model.f_pump - f;
  return x * model.resistance / (2.0 * kPlanck * std::sqrt(f * partner));
}

double SpectralState::n_at(double f) const {
  if (f < 0.0 || n_bar.size() == 0) return 0.0;
  const double u = f / grid_spacing;
  const auto j0 = static_cast<Eigen::Index>(std::floor(u));
  if (j0 >= n_bar.size() - 1) return j0 == n_bar.size() - 1 ? n_bar[j0] : 0.0;
  const double t = u - static_cast<double>(j0);
  return n_bar[j0] * (1.0 - t) + n_bar[j0 + 1] * t;
}

std::complex<double> SpectralState::m_at(double f) const {
  if (f < 0.0 || m_bar.size() == 0) return {0.0, 0.0};
  const double u = f / grid_spacing;
  const auto j0 = static_cast<Eigen::Index>(std::floor(u));
  if (j0 >= m_bar.size() - 1) {
    return j0 == m_bar.size() - 1 ? m_bar[j0] : std::complex<double>{0.0, 0.0};
  }
  const double t = u - static_cast<double>(j0);
  return m_bar[j0] * (1.0 - t) + m_bar[j0 + 1] * t;
}

void SpectralState::validate() const {
  if (f_pump <= 0.0 || m_bar.size() == 0) return;
  for (Eigen::Index j = 0; j < m_bar.size(); ++j) {
    const double m2 = std::norm(m_bar[j]);
    if (m2 == 0.0) continue;
    const double f = static_cast<double>(j) * grid_spacing;
    const double n1 = n_bar[j];
    const double n2 = n_at(f_pump - f);
    const double bound = std::min(n1 * (n2 + 1.0), n2 * (n1 + 1.0));
    if (m2 > bound * (1.0 + 1e-9) + 1e-15) {
      std::ostringstream msg;
      msg << "unphysical pair correlator at f=" << f << " Hz: |m|^2=" << m2
          << " exceeds bound " << bound;
      throw PhysicalityError(msg.str());
    }
  }
}

SpectralState uniform_state(double n, double f_lo, double f_hi,
                            double grid_spacing, double f_max, double m,
                            double f_pump) {
  SpectralState s;
  s.grid_spacing = grid_spacing;
  s.f_pump = f_pump;
  const auto bins = static_cast<Eigen::Index>(std::ceil(f_max / grid_spacing)) + 1;
  s.n_bar = Eigen::ArrayXd::Zero(bins);
  s.m_bar = Eigen::ArrayXcd::Zero(bins);
  for (Eigen::Index j = 0; j < bins; ++j) {
    const double f = static_cast<double>(j) * grid_spacing;
    if (f >= f_lo && f < f_hi) {
      s.n_bar[j] = n;
      // Pairs only where the partner frequency also lies inside the band.
      const double partner = f_pump - f;
      if (f_pump > 0.0 && partner >= f_lo && partner < f_hi) {
        s.m_bar[j] = m;
      }
    }
  }
  s.validate();
  return s;
}

SpectralState junction_state(const JunctionModel& model, double grid_spacing,
                             double f_max, double band_lo, double band_hi) {
  SpectralState s;
  s.grid_spacing = grid_spacing;
  s.f_pump = model.f_pump;
  const auto bins = static_cast<Eigen::Index>(std::ceil(f_max / grid_spacing)) + 1;
  s.n_bar = Eigen::ArrayXd::Zero(bins);
  s.m_bar = Eigen::ArrayXcd::Zero(bins);
  for (Eigen::Index j = 1; j < bins; ++j) {
    const double f = static_cast<double>(j) * grid_spacing;
    if (f < band_lo || f >= band_hi) continue;
    s.n_bar[j] = occupancy(f, model);
    // Pairs only exist when the partner frequency is also inside the band.
    const double partner = model.f_pump - f;
    if (partner > band_lo && partner < band_hi && f < model.f_pump) {
      s.m_bar[j] = pair_correlator(f, model);
    }
  }
  s.validate();
  return s;
}

DispersionModel DispersionModel::from_total_rotation(double total_radians,
                                                     double f_lo, double f_hi) {
  DispersionModel d;
  d.f_ref = f_lo;
  d.alpha = total_radians / ((f_hi - f_lo) * (f_hi - f_lo));
  return d;
}

ModePrediction predict(const ModeSpec& mode, const SpectralState& state,
                       const DispersionModel& dispersion) {
  if (mode.support_max() > state.max_freq() * (1.0 + 1e-12)) {
    throw ConfigError("mode extends beyond the state grid");
  }
  const double df = mode.grid_spacing;
  double n = 0.0;
  std::complex<double> m{0.0, 0.0};
  for (int j = 0; j < mode.bin_count(); ++j) {
    const std::complex<double> beta = mode.values[j];
    if (std::abs(beta) == 0.0) continue;
    const double f = mode.freq(j);
    n += std::norm(beta) * state.n_at(f) * df;
    if (state.f_pump > 0.0 && f < state.f_pump) {
      const double fp = state.f_pump - f;
      const std::complex<double> beta_p = mode.sample(fp);
      if (std::abs(beta_p) != 0.0) {
        const double phase = dispersion.phase(f) + dispersion.phase(fp);
        m += beta * beta_p * std::polar(1.0, phase) * state.m_at(f) * df;
      }
    }
  }
  ModePrediction p;
  p.n = n;
  p.m = std::abs(m);
  p.v_minus = n + 0.5 - p.m;
  p.v_plus = n + 0.5 + p.m;
  return p;
}

std::vector<EffectiveFrequencyPoint> effective_frequency(
    const JunctionModel& base, const std::vector<double>& i_dc, double f1,
    double f2) {
  if (f1 == f2) {
    // Degenerate pair: the effective frequency is f1 for every bias.
    std::vector<EffectiveFrequencyPoint> out;
    for (double i : i_dc) out.push_back({i, f1});
    return out;
  }
  std::vector<EffectiveFrequencyPoint> out;
  for (double i : i_dc) {
    JunctionModel m = base;
    m.v_dc = i * base.resistance;
    const double n1 = occupancy(f1, m);
    const double n2 = occupancy(f2, m);
    if (n1 + n2 <= 1e-30) continue;  // both vanish; point omitted
    out.push_back({i, (f1 * n1 + f2 * n2) / (n1 + n2)});
  }
  return out;
}

void write_state_csv(const SpectralState& s, std::ostream& os) {
  os << std::setprecision(17);
  os << "f,n_bar,re_m_bar,im_m_bar\n";
  for (Eigen::Index j = 0; j < s.n_bar.size(); ++j) {
    os << static_cast<double>(j) * s.grid_spacing << "," << s.n_bar[j] << ","
       << s.m_bar[j].real() << "," << s.m_bar[j].imag() << "\n";
  }
}

SpectralState read_state_csv(std::istream& is, double f_pump) {
  SpectralState s;
  s.f_pump = f_pump;
  std::string line;
  std::vector<double> f, n;
  std::vector<std::complex<double>> m;
  while (std::getline(is, line)) {
    if (line.empty() || !(std::isdigit(line[0]) || line[0] == '-')) continue;
    std::istringstream row(line);
    double fv, nv, mr, mi;
    char comma;
    if (row >> fv >> comma >> nv >> comma >> mr >> comma >> mi) {
      f.push_back(fv);
      n.push_back(nv);
      m.push_back({mr, mi});
    }
  }
  if (f.size() < 2) throw IoError("state CSV needs at least two rows");
  s.grid_spacing = f[1] - f[0];
  s.n_bar = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(f.size()));
  s.m_bar = Eigen::ArrayXcd::Zero(static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) {
    s.n_bar[static_cast<Eigen::Index>(i)] = n[i];
    s.m_bar[static_cast<Eigen::Index>(i)] = m[i];
  }
  s.validate();
  return s;
}

} // namespace bbpc
