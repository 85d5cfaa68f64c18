#include "bbpc/calib.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "bbpc/constants.hpp"
#include "bbpc/errors.hpp"
#include "bbpc/junction.hpp"

namespace bbpc {

namespace {

struct BinData {
  double f = 0.0;
  std::vector<double> i_dc;
  std::vector<double> psd;
};

// For fixed Te the model is linear in (a, b): psd = a * s2 + b with
// b = a * 2 k T_N / R. Returns the SSE of the profiled fit.
struct ProfiledFit {
  double a = 0.0;
  double b = 0.0;
  double sse = 0.0;
};

ProfiledFit profile_bin(const BinData& bin, double r_ohms, double te) {
  JunctionModel m;
  m.resistance = r_ohms;
  m.electron_temp = te;
  const std::size_t n = bin.i_dc.size();
  double s_s = 0, s_s2 = 0, s_y = 0, s_sy = 0;
  std::vector<double> s2v(n);
  for (std::size_t k = 0; k < n; ++k) {
    m.v_dc = bin.i_dc[k] * r_ohms;
    s2v[k] = s2_density(bin.f, m.v_dc, m);
    s_s += s2v[k];
    s_s2 += s2v[k] * s2v[k];
    s_y += bin.psd[k];
    s_sy += s2v[k] * bin.psd[k];
  }
  const double nn = static_cast<double>(n);
  const double denom = nn * s_s2 - s_s * s_s;
  ProfiledFit fit;
  if (denom <= 0.0) {
    fit.sse = 1e300;
    return fit;
  }
  fit.a = (nn * s_sy - s_s * s_y) / denom;
  fit.b = (s_s2 * s_y - s_s * s_sy) / denom;
  for (std::size_t k = 0; k < n; ++k) {
    const double res = bin.psd[k] - (fit.a * s2v[k] + fit.b);
    fit.sse += res * res;
  }
  return fit;
}

double total_sse(const std::vector<BinData>& bins, double r_ohms, double te) {
  double s = 0.0;
  for (const auto& b : bins) s += profile_bin(b, r_ohms, te).sse;
  return s;
}

// Golden-section minimum of fn on [lo, hi].
template <typename F>
double golden_min(F&& fn, double lo, double hi, double tol) {
  const double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  while (b - a > tol * (std::abs(a) + std::abs(b))) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = fn(x2);
    }
  }
  return 0.5 * (a + b);
}

template <typename F>
double scan_then_refine(F&& fn, double lo, double hi, int coarse) {
  double best_x = lo, best_f = 1e300;
  for (int i = 0; i <= coarse; ++i) {
    // Log-spaced scan: the thermal rounding makes the surface mildly
    // nonconvex at low Te.
    const double x = lo * std::pow(hi / lo, double(i) / coarse);
    const double v = fn(x);
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
  }
  const double span = std::pow(hi / lo, 1.0 / coarse);
  return golden_min(fn, best_x / span, best_x * span, 1e-7);
}

} // namespace

double CalibResult::gain_db_at(double f) const {
  if (bins.empty()) return 0.0;
  const CalibBin* best = &bins.front();
  for (const auto& b : bins) {
    if (std::abs(b.f - f) < std::abs(best->f - f)) best = &b;
  }
  return best->gain_db;
}

double CalibResult::noise_temp_at(double f) const {
  if (bins.empty()) return 0.0;
  const CalibBin* best = &bins.front();
  for (const auto& b : bins) {
    if (std::abs(b.f - f) < std::abs(best->f - f)) best = &b;
  }
  return best->noise_temp;
}

CalibResult fit_thermometry(const std::vector<PsdPoint>& spectra,
                            double r_ohms) {
  std::map<double, BinData> by_f;
  for (const auto& p : spectra) {
    auto& bin = by_f[p.f];
    bin.f = p.f;
    bin.i_dc.push_back(p.i_dc);
    bin.psd.push_back(p.psd);
  }
  if (by_f.size() < 2) {
    throw ConfigError("fit_thermometry needs >= 2 frequency bins");
  }
  std::vector<BinData> bins;
  double max_ev = 0.0;
  for (auto& [f, bin] : by_f) {
    if (bin.i_dc.size() < 7) {
      throw ConfigError("fit_thermometry needs >= 7 bias points per bin");
    }
    for (double i : bin.i_dc) {
      max_ev = std::max(max_ev, std::abs(i) * r_ohms * kElementaryCharge);
    }
    bins.push_back(std::move(bin));
  }

  const double te_lo = 1e-4, te_hi = 1.0;
  CalibResult result;
  // Stage 1: independent per-bin temperature (diagnostic).
  for (auto& bin : bins) {
    const double te_bin = scan_then_refine(
        [&](double te) { return profile_bin(bin, r_ohms, te).sse; }, te_lo,
        te_hi, 160);
    CalibBin out;
    out.f = bin.f;
    out.te_local = te_bin;
    result.bins.push_back(out);
  }
  // Stage 2: shared Te across bins.
  result.te = scan_then_refine(
      [&](double te) { return total_sse(bins, r_ohms, te); }, te_lo, te_hi,
      160);

  if (max_ev < 5.0 * kBoltzmann * result.te) {
    throw ConfigError(
        "bias range too narrow: thermal-to-shot crossover unobserved");
  }

  double ss_total = 0.0;
  std::size_t n_total = 0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const ProfiledFit fit = profile_bin(bins[i], r_ohms, result.te);
    auto& out = result.bins[i];
    if (!(fit.a > 0.0)) throw ConfigError("non-positive fitted gain");
    out.gain_db = 10.0 * std::log10(fit.a);
    out.noise_temp = fit.b * r_ohms / (2.0 * kBoltzmann * fit.a);
    out.residual_rms = std::sqrt(fit.sse / bins[i].i_dc.size());
    ss_total += fit.sse;
    n_total += bins[i].i_dc.size();
  }
  result.residual_rms = std::sqrt(ss_total / n_total);

  // Te uncertainty from the curvature of the profiled SSE.
  const double h = std::max(1e-5 * result.te, 1e-7);
  const double f0 = total_sse(bins, r_ohms, result.te);
  const double fp = total_sse(bins, r_ohms, result.te + h);
  const double fm = total_sse(bins, r_ohms, std::max(te_lo, result.te - h));
  const double curv = (fp - 2.0 * f0 + fm) / (h * h);
  const double dof = std::max<double>(1.0, double(n_total) - 2.0 * bins.size() - 1.0);
  if (curv > 0.0) {
    result.te_err = std::sqrt(2.0 * (f0 / dof) / curv);
  }
  return result;
}

std::vector<ScheduleEntry> interlace_plan(int n_conditions, int ref_period) {
  if (ref_period < 1) throw ConfigError("ref_period must be >= 1");
  std::vector<ScheduleEntry> plan;
  if (n_conditions <= 0) return plan;
  plan.push_back({true, -1});
  int since_ref = 0;
  for (int c = 0; c < n_conditions; ++c) {
    plan.push_back({false, c});
    if (++since_ref == ref_period) {
      plan.push_back({true, -1});
      since_ref = 0;
    }
  }
  if (!plan.back().is_reference) plan.push_back({true, -1});
  return plan;
}

std::vector<PsdPoint> read_psd_csv(std::istream& is) {
  std::vector<PsdPoint> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || !(std::isdigit(line[0]) || line[0] == '-')) continue;
    std::istringstream row(line);
    PsdPoint p;
    char comma;
    if (row >> p.f >> comma >> p.i_dc >> comma >> p.psd) out.push_back(p);
  }
  if (out.empty()) throw IoError("no PSD rows parsed");
  return out;
}

void write_calib_csv(const CalibResult& r, std::ostream& os) {
  os << std::setprecision(17);
  os << "f,gain_db,noise_temp_k,te_local_k,residual_rms\n";
  for (const auto& b : r.bins) {
    os << b.f << "," << b.gain_db << "," << b.noise_temp << "," << b.te_local
       << "," << b.residual_rms << "\n";
  }
}

} // namespace bbpc
