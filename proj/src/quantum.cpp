#include "bbpc/quantum.hpp"

#include <cmath>

#include "bbpc/errors.hpp"

namespace bbpc {

PhotonStats photon_stats(const CumulantPair& acc) {
  if (acc.count == 0) throw ConfigError("photon_stats: empty accumulator");
  PhotonStats s;
  s.count = acc.count;
  const double c2 = acc.c2;
  const double c4 = acc.c4;
  s.n = c2 - 0.5;
  // var_n = (2/3)<x^4> - <x^2>^2 - 1/4 = (2/3) c4 + c2^2 - 1/4.
  s.var_n = (2.0 / 3.0) * c4 + c2 * c2 - 0.25;
  s.n_err = acc.c2_err;
  // d var/d c4 = 2/3, d var/d c2 = 2 c2.
  s.var_n_err = std::sqrt(std::max(
      0.0, (4.0 / 9.0) * acc.c4_err * acc.c4_err +
               4.0 * c2 * c2 * acc.c2_err * acc.c2_err +
               (4.0 / 3.0) * c2 * acc.cov_c2_c4));
  s.cov_n_var = (2.0 / 3.0) * acc.cov_c2_c4 + 2.0 * c2 * acc.c2_err * acc.c2_err;
  if (s.n != 0.0) {
    s.fano = s.var_n / s.n;
    const double r1 = s.var_n_err / s.var_n;
    const double r2 = s.n_err / s.n;
    const double rc = 2.0 * s.cov_n_var / (s.var_n * s.n);
    s.fano_err = std::abs(s.fano) *
                 std::sqrt(std::max(0.0, r1 * r1 + r2 * r2 - rc));
  }
  return s;
}

CumulantPair reference_subtract(const CumulantPair& cond,
                                const CumulantPair& ref) {
  if (cond.kernel_hash && ref.kernel_hash &&
      cond.kernel_hash != ref.kernel_hash) {
    throw ConfigError("reference_subtract: kernels differ");
  }
  CumulantPair out;
  out.c2 = cond.c2 - ref.c2 + 0.5;
  out.c4 = cond.c4 - ref.c4;
  out.c2_err = std::hypot(cond.c2_err, ref.c2_err);
  out.c4_err = std::hypot(cond.c4_err, ref.c4_err);
  out.cov_c2_c4 = cond.cov_c2_c4 + ref.cov_c2_c4;
  out.count = std::min(cond.count, ref.count);
  out.kernel_hash = cond.kernel_hash;
  return out;
}

SqueezingEstimate m_and_variances(const PhotonStats& stats) {
  SqueezingEstimate e;
  const double thermal = stats.n * (stats.n + 1.0);
  const double rad = stats.var_n - thermal;
  if (rad <= 0.0) {
    e.below_thermal = rad < 0.0;
    e.m = 0.0;
    e.m_err = 0.0;
    e.v_minus = stats.n + 0.5;
    e.v_plus = stats.n + 0.5;
    e.v_minus_err = stats.n_err;
  } else {
    e.m = std::sqrt(rad);
    // dm/dvar = 1/(2m), dm/dn = -(2n+1)/(2m).
    const double dv = 1.0 / (2.0 * e.m);
    const double dn = -(2.0 * stats.n + 1.0) / (2.0 * e.m);
    e.m_err = std::sqrt(std::max(
        0.0, dv * dv * stats.var_n_err * stats.var_n_err +
                 dn * dn * stats.n_err * stats.n_err +
                 2.0 * dv * dn * stats.cov_n_var));
    e.v_minus = stats.n + 0.5 - e.m;
    e.v_plus = stats.n + 0.5 + e.m;
    const double dvm_dn = 1.0 - dn;   // d v_minus / d n = 1 - dm/dn
    const double dvm_dv = -dv;
    e.v_minus_err = std::sqrt(std::max(
        0.0, dvm_dn * dvm_dn * stats.n_err * stats.n_err +
                 dvm_dv * dvm_dv * stats.var_n_err * stats.var_n_err +
                 2.0 * dvm_dn * dvm_dv * stats.cov_n_var));
  }
  e.squeezing_db = 10.0 * std::log10(e.v_minus / 0.5);
  e.squeezing_db_err =
      e.v_minus > 0.0 ? 10.0 / std::log(10.0) * e.v_minus_err / e.v_minus : 0.0;
  return e;
}

PairStats pair_stats(const PairMoments& m, double overlap_sq) {
  PairStats out;
  out.mode_a = photon_stats(m.a_x);
  out.mode_b = photon_stats(m.b_x);
  // Classical intensity covariance equals <dn1 dn2> for orthogonal modes;
  // the overlap term removes the vacuum double count otherwise.
  out.corr = (m.mean_qa_qb - m.mean_qa * m.mean_qb) - 0.25 * overlap_sq;
  out.corr_err = m.err_qa_qb;
  out.var_n_quarter =
      0.25 * (out.mode_a.var_n + out.mode_b.var_n) + 0.5 * out.corr;
  out.var_n_quarter_err = std::sqrt(
      0.0625 * (out.mode_a.var_n_err * out.mode_a.var_n_err +
                out.mode_b.var_n_err * out.mode_b.var_n_err) +
      0.25 * out.corr_err * out.corr_err);
  return out;
}

Eigen::Matrix4d GaussianBipartite::covariance() const {
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  s(0, 0) = s(1, 1) = n_a + 0.5;
  s(2, 2) = s(3, 3) = n_b + 0.5;
  s(0, 2) = s(2, 0) = m;
  s(1, 3) = s(3, 1) = -m;
  return s;
}

GaussianBipartite make_bipartite(double n_a, double n_b, double m,
                                 double m_tolerance) {
  if (n_a < 0.0 || n_b < 0.0) {
    throw PhysicalityError("negative occupancy in bipartite state");
  }
  GaussianBipartite gb;
  gb.n_a = n_a;
  gb.n_b = n_b;
  const double bound =
      std::sqrt(std::min(n_a * (n_b + 1.0), n_b * (n_a + 1.0)));
  if (m > bound) {
    if (m > bound + 3.0 * m_tolerance + 1e-12) {
      throw PhysicalityError("pair amplitude unphysical beyond 3 sigma");
    }
    gb.m = bound;
    gb.clamped = true;
  } else {
    gb.m = m;
  }
  return gb;
}

double ppt_symplectic_min(const GaussianBipartite& gb) {
  const double da = (gb.n_a + 0.5) * (gb.n_a + 0.5);
  const double db = (gb.n_b + 0.5) * (gb.n_b + 0.5);
  const double dc = -gb.m * gb.m;
  const double dsigma =
      ((gb.n_a + 0.5) * (gb.n_b + 0.5) - gb.m * gb.m) *
      ((gb.n_a + 0.5) * (gb.n_b + 0.5) - gb.m * gb.m);
  const double delta_t = da + db - 2.0 * dc;
  const double disc = std::max(0.0, delta_t * delta_t - 4.0 * dsigma);
  return std::sqrt(std::max(0.0, (delta_t - std::sqrt(disc)) / 2.0));
}

double entanglement_of_formation(const GaussianBipartite& gb) {
  const double x = 2.0 * ppt_symplectic_min(gb);
  if (x >= 1.0) return 0.0;
  const double rp = 1.0 / std::sqrt(x), rm = std::sqrt(x);
  const double cp = (rp + rm) * (rp + rm) / 4.0;
  const double cm = (rp - rm) * (rp - rm) / 4.0;
  double e = cp * std::log2(cp);
  if (cm > 0.0) e -= cm * std::log2(cm);
  return e;
}

EofResult entanglement_of_formation_checked(const GaussianBipartite& gb) {
  EofResult r;
  r.e_f = entanglement_of_formation(gb);
  const double tot = gb.n_a + gb.n_b;
  r.asymmetric_estimate =
      tot > 0.0 && std::abs(gb.n_a - gb.n_b) / tot > 0.1;
  return r;
}

const char* to_string(SteeringClass c) {
  switch (c) {
    case SteeringClass::Separable: return "separable";
    case SteeringClass::Entangled: return "entangled";
    case SteeringClass::SteerableAtoB: return "steerable_a_to_b";
    case SteeringClass::SteerableBtoA: return "steerable_b_to_a";
    case SteeringClass::TwoWay: return "two_way_steerable";
  }
  return "?";
}

SteeringResult steering(const GaussianBipartite& gb) {
  SteeringResult r;
  const double det_a = (gb.n_a + 0.5) * (gb.n_a + 0.5);
  const double det_b = (gb.n_b + 0.5) * (gb.n_b + 0.5);
  const double q = (gb.n_a + 0.5) * (gb.n_b + 0.5) - gb.m * gb.m;
  const double det_sigma = q * q;
  r.mu_a = 1.0 / (2.0 * std::sqrt(det_a));
  r.mu_b = 1.0 / (2.0 * std::sqrt(det_b));
  r.mu = 1.0 / (4.0 * std::sqrt(det_sigma));
  r.eta = r.mu_a * r.mu_b / r.mu;
  // Vacuum-normalized units: det(2 sigma_A) = 4 det_a, det(2 sigma) = 16 det.
  const double zeta_a = 4.0 * det_a, zeta_b = 4.0 * det_b;
  const double zeta = 16.0 * det_sigma;
  r.g_a_to_b = std::max(0.0, 0.5 * std::log(zeta_a / zeta));
  r.g_b_to_a = std::max(0.0, 0.5 * std::log(zeta_b / zeta));
  const bool entangled = 2.0 * ppt_symplectic_min(gb) < 1.0;
  const bool sab = r.g_a_to_b > 0.0;
  const bool sba = r.g_b_to_a > 0.0;
  if (!entangled) {
    r.cls = SteeringClass::Separable;
  } else if (sab && sba) {
    r.cls = SteeringClass::TwoWay;
  } else if (sab) {
    r.cls = SteeringClass::SteerableAtoB;
  } else if (sba) {
    r.cls = SteeringClass::SteerableBtoA;
  } else {
    r.cls = SteeringClass::Entangled;
  }
  return r;
}

std::vector<RatePoint> entanglement_rate(
    const std::vector<std::pair<double, double>>& ef_curve, RateKind kind) {
  std::vector<RatePoint> out;
  out.reserve(ef_curve.size());
  double integral = 0.0;
  for (std::size_t i = 0; i < ef_curve.size(); ++i) {
    const auto [df, ef] = ef_curve[i];
    RatePoint p;
    p.delta_f = df;
    if (kind == RateKind::Wideband) {
      p.rate = 2.0 * df * ef;
    } else {
      if (i == 0) {
        integral = df * ef;  // triangle from the origin
      } else {
        const auto [df0, ef0] = ef_curve[i - 1];
        integral += 0.5 * (ef + ef0) * (df - df0);
      }
      p.rate = 2.0 * integral;
    }
    out.push_back(p);
  }
  return out;
}

DuanResult duan_check(
    const std::vector<std::pair<double, double>>& v_minus_curve) {
  DuanResult r;
  r.inseparable.reserve(v_minus_curve.size());
  double best = 1e300;
  for (const auto& [lambda, v] : v_minus_curve) {
    const bool flag = v < 0.5;
    r.inseparable.push_back(flag);
    r.any = r.any || flag;
    if (v < best) {
      best = v;
      r.lambda_star = lambda;
      r.v_min = v;
    }
  }
  return r;
}

double duan_lambda_from_a(double a) {
  const double a4 = a * a * a * a;
  return a4 / (1.0 + a4);
}

double duan_a_from_lambda(double lambda) {
  if (lambda <= 0.0) return 0.0;
  if (lambda >= 1.0) throw ConfigError("lambda = 1 maps to a = infinity");
  return std::pow(lambda / (1.0 - lambda), 0.25);
}

LinearityReport c4_vs_c2_diagnostic(
    const std::vector<std::pair<double, double>>& points,
    const std::vector<double>* c4_errors) {
  if (points.size() < 3) {
    throw ConfigError("c4_vs_c2_diagnostic needs at least 3 sweep points");
  }
  // Weighted least squares for c4 = alpha c2 + beta.
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double w =
        c4_errors && (*c4_errors)[i] > 0.0
            ? 1.0 / ((*c4_errors)[i] * (*c4_errors)[i])
            : 1.0;
    const auto [x, y] = points[i];
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  const double denom = sw * sxx - sx * sx;
  if (denom <= 0.0) throw ConfigError("degenerate c2 sweep");
  LinearityReport r;
  r.alpha = (sw * sxy - sx * sy) / denom;
  r.beta = (sxx * sy - sx * sxy) / denom;
  if (c4_errors) {
    r.alpha_err = std::sqrt(sw / denom);
  } else {
    // Residual-based error estimate.
    double ss = 0.0;
    for (const auto& [x, y] : points) {
      const double res = y - (r.alpha * x + r.beta);
      ss += res * res;
    }
    const double dof = static_cast<double>(points.size()) - 2.0;
    r.alpha_err = std::sqrt(std::max(0.0, ss / dof * sw / denom));
  }
  r.linear = std::abs(r.alpha) <= 3.0 * r.alpha_err;
  return r;
}

} // namespace bbpc
