#include "bbpc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <ostream>
#include <vector>

#include "bbpc/constants.hpp"
#include "bbpc/errors.hpp"
#include "bbpc/fft.hpp"

namespace bbpc {

namespace {

// 16-point Gauss-Legendre rule on [-1, 1].
constexpr double kGlNode[8] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
constexpr double kGlWeight[8] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

// Maclaurin series, used for u <= 2 where it converges without cancellation
// trouble.
FresnelCS fresnel_series(double u) {
  const double a = kPi / 2.0;
  const double u4 = u * u * u * u;
  // C: sum (-1)^k a^{2k} u^{4k+1} / ((2k)! (4k+1))
  double base = u;
  double c = 0.0, c_comp = 0.0;
  for (int k = 0; k < 40; ++k) {
    const double term = base / (4 * k + 1);
    const double t = c + term;  // Neumaier compensation
    c_comp += std::abs(c) >= std::abs(term) ? (c - t) + term : (term - t) + c;
    c = t;
    base *= -a * a * u4 / ((2 * k + 1) * (2 * k + 2));
    if (std::abs(base) < 1e-18 * (std::abs(c) + 1e-300)) break;
  }
  // S: sum (-1)^k a^{2k+1} u^{4k+3} / ((2k+1)! (4k+3))
  base = a * u * u * u;
  double s = 0.0, s_comp = 0.0;
  for (int k = 0; k < 40; ++k) {
    const double term = base / (4 * k + 3);
    const double t = s + term;
    s_comp += std::abs(s) >= std::abs(term) ? (s - t) + term : (term - t) + s;
    s = t;
    base *= -a * a * u4 / ((2 * k + 2) * (2 * k + 3));
    if (std::abs(base) < 1e-18 * (std::abs(s) + 1e-300)) break;
  }
  return {c + c_comp, s + s_comp};
}

// Fixed-panel Gauss-Legendre for the mid range, <= one oscillation per panel.
FresnelCS fresnel_quadrature(double u) {
  const int panels = std::max(8, static_cast<int>(std::ceil(u * u)));
  const double hstep = u / panels;
  double c = 0.0, s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * hstep;
    const double half = 0.5 * hstep;
    for (int i = 0; i < 8; ++i) {
      for (int sign = -1; sign <= 1; sign += 2) {
        const double x = mid + sign * half * kGlNode[i];
        const double ph = kPi / 2.0 * x * x;
        c += kGlWeight[i] * half * std::cos(ph);
        s += kGlWeight[i] * half * std::sin(ph);
      }
    }
  }
  return {c, s};
}

// Large-argument auxiliary expansion, truncated at the smallest term.
FresnelCS fresnel_asymptotic(double u) {
  const double x = kPi * u * u;
  double f = 0.0, g = 0.0;
  double cterm = 1.0;  // (4k-1)!! / x^{2k}
  double dterm = 1.0;  // (4k+1)!! / x^{2k}
  double fsum = 0.0, gsum = 0.0;
  double sign = 1.0;
  double prev_c = 1e300, prev_d = 1e300;
  for (int k = 0; k < 30; ++k) {
    if (std::abs(cterm) < prev_c) {
      fsum += sign * cterm;
      prev_c = std::abs(cterm);
    }
    if (std::abs(dterm) < prev_d) {
      gsum += sign * dterm;
      prev_d = std::abs(dterm);
    }
    cterm *= (4 * k + 1) * (4 * k + 3) / (x * x);
    dterm *= (4 * k + 3) * (4 * k + 5) / (x * x);
    sign = -sign;
    if (prev_c < 1e-17 && prev_d < 1e-17) break;
  }
  f = fsum / (kPi * u);
  g = gsum / (kPi * u * x);
  const double ph = kPi / 2.0 * u * u;
  const double sn = std::sin(ph), cs = std::cos(ph);
  return {0.5 + f * sn - g * cs, 0.5 - f * cs - g * sn};
}

} // namespace

FresnelCS fresnel(double u) {
  if (u < 0.0) {
    FresnelCS r = fresnel(-u);
    return {-r.c, -r.s};
  }
  if (u <= 2.0) return fresnel_series(u);
  if (u < 4.5) return fresnel_quadrature(u);
  return fresnel_asymptotic(u);
}

DiscreteKernel quadrature_kernel(const KernelConfig& cfg) {
  if (cfg.n_taps % 2 == 0) throw ConfigError("n_taps must be odd");
  if (!(cfg.sample_rate > 0.0) || !(cfg.impedance > 0.0)) {
    throw ConfigError("invalid kernel config");
  }
  const bool theta0 = std::abs(cfg.theta) < 1e-12;
  const bool theta90 = std::abs(cfg.theta - kPi / 2) < 1e-12;
  if (!theta0 && !theta90) {
    throw ConfigError("closed-form kernel defined for theta in {0, pi/2}");
  }
  const double f_nyq = cfg.sample_rate / 2.0;
  const double pref = 2.0 * std::sqrt(2.0 * f_nyq / (cfg.impedance * kPlanck));
  DiscreteKernel k;
  k.sample_rate = cfg.sample_rate;
  k.center_index = (cfg.n_taps - 1) / 2;
  k.taps = Eigen::ArrayXd::Zero(cfg.n_taps);
  for (int n = -k.center_index; n <= k.center_index; ++n) {
    double v;
    if (n == 0) {
      v = theta0 ? 0.0 : pref * std::sqrt(2.0);
    } else {
      const double an = std::abs(static_cast<double>(n));
      const FresnelCS cs = fresnel(std::sqrt(2.0 * an));
      const double core = (theta0 ? cs.s : cs.c) / std::sqrt(an);
      v = pref * (theta0 && n < 0 ? -core : core);
    }
    k.taps[k.center_index + n] = v;
  }
  k.provenance = theta0 ? "bare k, theta=0" : "bare k, theta=pi/2";
  return k;
}

DiscreteKernel compose(const ModeSpec& mode, const KernelConfig& cfg,
                       const Eigen::ArrayXd& inverse_gain, double dc_guard) {
  if (cfg.n_taps % 2 == 0) throw ConfigError("n_taps must be odd");
  const double fs = cfg.sample_rate;
  const double df = mode.grid_spacing;
  if (!(fs > 2.0 * mode.support_max())) {
    throw ConfigError("mode '" + mode.label + "' extends beyond Nyquist");
  }
  const auto n_grid = static_cast<std::size_t>(std::llround(fs / df));
  if (std::abs(static_cast<double>(n_grid) * df - fs) > 1e-6 * fs) {
    throw ConfigError("mode grid spacing not commensurate with sample rate");
  }
  if (static_cast<std::size_t>(cfg.n_taps) > n_grid) {
    throw ConfigError("n_taps exceeds the mode grid length");
  }
  if (inverse_gain.size() != 0 && inverse_gain.size() < mode.values.size()) {
    throw ConfigError("inverse gain grid shorter than mode grid");
  }

  // Frequency response k(f) beta(f) / |g(f)| on the mode grid.
  std::vector<std::complex<double>> buf(n_grid, {0.0, 0.0});
  const std::complex<double> rot =
      std::polar(1.0, kPi / 2.0 - cfg.theta);  // i for theta=0, 1 for pi/2
  const auto j_max =
      std::min<std::size_t>(mode.values.size() - 1, n_grid / 2);
  for (std::size_t j = 1; j <= j_max; ++j) {
    const std::complex<double> beta = mode.values[static_cast<Eigen::Index>(j)];
    if (std::abs(beta) == 0.0) continue;
    const double f = static_cast<double>(j) * df;
    if (f < dc_guard) {
      throw ConfigError("mode '" + mode.label +
                        "' has weight below the dc guard band");
    }
    double ig = 1.0;
    if (inverse_gain.size() != 0) {
      ig = inverse_gain[static_cast<Eigen::Index>(j)];
      if (!std::isfinite(ig)) {
        throw ConfigError("deconvolution singular: |g| = 0 on mode support");
      }
    }
    const double kmag = 1.0 / std::sqrt(cfg.impedance * kPlanck * f);
    buf[j] = rot * kmag * beta * ig;
    buf[n_grid - j] = std::conj(buf[j]);
  }

  // taps[n] = dt * int_{-fN}^{fN} H(f) e^{2 pi i f n dt} df = IDFT(spec)[n] / N.
  complex_dft(buf, +1);
  const int center = (cfg.n_taps - 1) / 2;
  DiscreteKernel k;
  k.sample_rate = fs;
  k.center_index = center;
  k.taps = Eigen::ArrayXd::Zero(cfg.n_taps);
  double energy_all = 0.0;
  for (std::size_t i = 0; i < n_grid; ++i) {
    energy_all += std::norm(buf[i]);
  }
  double energy_kept = 0.0;
  for (int n = -center; n <= center; ++n) {
    const std::size_t idx = static_cast<std::size_t>((n + static_cast<long>(n_grid)) % static_cast<long>(n_grid));
    const std::complex<double> v = buf[idx];
    k.taps[center + n] = v.real() / static_cast<double>(n_grid);
    energy_kept += std::norm(v);
  }
  k.window_energy_fraction = energy_all > 0.0 ? energy_kept / energy_all : 1.0;

  // Pin the vacuum at the source plane: rescale the truncated taps so that
  // source vacuum noise (two-sided density Z h |f| / 4), carried through the
  // chain gain |g|, gives <x^2> = 1/2. The measured voltage carries |g|^2
  // times the source density, so |g| re-enters the integral that the
  // deconvolution removed per bin.
  const auto gain_sq_at = [&](double f) {
    if (inverse_gain.size() == 0) return 1.0;
    const double u = f / df;
    const auto j0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(u),
                                           inverse_gain.size() - 1);
    const auto j1 = std::min<Eigen::Index>(j0 + 1, inverse_gain.size() - 1);
    const double t = std::clamp(u - static_cast<double>(j0), 0.0, 1.0);
    const double ig = inverse_gain[j0] * (1.0 - t) + inverse_gain[j1] * t;
    return ig > 0.0 && std::isfinite(ig) ? 1.0 / (ig * ig) : 1.0;
  };
  const std::size_t n_fine = 1u << 18;
  RealFft fft(n_fine);
  for (std::size_t i = 0; i < n_fine; ++i) fft.time()[i] = 0.0;
  for (int i = 0; i < cfg.n_taps; ++i) fft.time()[i] = k.taps[i];
  fft.forward();
  const double df_fine = fs / static_cast<double>(n_fine);
  double var = 0.0;
  for (std::size_t q = 1; q < fft.spectrum_size(); ++q) {
    const double f = static_cast<double>(q) * df_fine;
    const double w = (q + 1 == fft.spectrum_size()) ? 0.5 : 1.0;
    var += w * std::norm(fft.freq()[q]) * gain_sq_at(f) *
           (cfg.impedance * kPlanck * f / 4.0);
  }
  var *= 2.0 * df_fine;  // both frequency signs
  if (!(var > 0.0)) throw ConfigError("composed kernel has no response");
  k.vacuum_gain = std::sqrt(0.5 / var);
  k.taps *= k.vacuum_gain;
  k.provenance = mode.label + (std::abs(cfg.theta) < 1e-12 ? " x" : " p");
  return k;
}

std::complex<double> kernel_response(const DiscreteKernel& k, double f) {
  const double dt = 1.0 / k.sample_rate;
  std::complex<double> h{0.0, 0.0};
  for (int i = 0; i < k.taps.size(); ++i) {
    const double t = (i - k.center_index) * dt;
    h += k.taps[i] * std::polar(1.0, -2.0 * kPi * f * t);
  }
  return h;
}

void write_kernel_csv(const DiscreteKernel& k, std::ostream& os) {
  os << std::setprecision(17);
  os << "index,tap\n";
  for (int i = 0; i < k.taps.size(); ++i) {
    os << (i - k.center_index) << "," << k.taps[i] << "\n";
  }
}

} // namespace bbpc
