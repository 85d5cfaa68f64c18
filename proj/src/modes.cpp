#include "bbpc/modes.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "bbpc/constants.hpp"
#include "bbpc/errors.hpp"

namespace bbpc {

namespace {

void normalize(ModeSpec& m) {
  const double n2 = (m.values.abs2().sum()) * m.grid_spacing;
  if (!(n2 > 0.0)) throw ConfigError("mode '" + m.label + "' has zero norm");
  m.values /= std::sqrt(n2);
}

// Amplitude profile of one sub-band on [f0-bw/2, f0+bw/2).
double band_amplitude(double f, double f0, double bw, SubbandShape shape) {
  const double x = f - f0;
  if (x < -bw / 2 || x >= bw / 2) return 0.0;
  switch (shape) {
    case SubbandShape::Rect:
      return 1.0;
    case SubbandShape::RaisedCosine: {
      const double c = std::cos(kPi * x / bw);
      return c * c;
    }
  }
  return 0.0;
}

ModeSpec make_band(double f0, double bw, SubbandShape shape, double df,
                   std::string label) {
  if (!(df > 0.0)) throw ConfigError("grid_spacing must be positive");
  if (!(bw > df)) throw ConfigError("bandwidth must exceed grid_spacing");
  if (!(f0 - bw / 2 > 0.0)) throw ConfigError("band extends to dc or below");
  ModeSpec m;
  m.grid_spacing = df;
  m.label = std::move(label);
  const int n = static_cast<int>(std::ceil((f0 + bw / 2) / df)) + 1;
  m.values = Eigen::ArrayXcd::Zero(n);
  for (int j = 0; j < n; ++j) {
    m.values[j] = band_amplitude(j * df, f0, bw, shape);
  }
  normalize(m);
  return m;
}

} // namespace

double ModeSpec::norm_sq() const { return values.abs2().sum() * grid_spacing; }

double ModeSpec::support_min() const {
  for (int j = 0; j < bin_count(); ++j) {
    if (std::abs(values[j]) > 0.0) return freq(j);
  }
  return 0.0;
}

double ModeSpec::support_max() const {
  for (int j = bin_count() - 1; j >= 0; --j) {
    if (std::abs(values[j]) > 0.0) return freq(j);
  }
  return 0.0;
}

std::complex<double> ModeSpec::sample(double f) const {
  if (f < 0.0 || values.size() == 0) return {0.0, 0.0};
  const double u = f / grid_spacing;
  const auto j0 = static_cast<Eigen::Index>(std::floor(u));
  if (j0 >= values.size() - 1) {
    return j0 == values.size() - 1 && u - static_cast<double>(j0) < 1e-9
               ? values[j0]
               : std::complex<double>{0.0, 0.0};
  }
  const double t = u - static_cast<double>(j0);
  return values[j0] * (1.0 - t) + values[j0 + 1] * t;
}

ModeSpec make_monochromatic(double f0, double bandwidth, SubbandShape shape,
                            double grid_spacing, std::string label) {
  if (label.empty()) label = "mono_" + std::to_string(f0 * 1e-9) + "GHz";
  return make_band(f0, bandwidth, shape, grid_spacing, std::move(label));
}

ModeSpec make_bichromatic(double f1, double f2, double bandwidth, double lambda,
                          double rel_phase, SubbandShape shape,
                          double grid_spacing, std::string label) {
  if (!(std::abs(f2 - f1) > bandwidth)) {
    throw ConfigError("bichromatic sub-bands overlap: |f2-f1| <= bandwidth");
  }
  if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lambda outside [0,1]");
  ModeSpec b1 = make_band(f1, bandwidth, shape, grid_spacing, "sub1");
  ModeSpec b2 = make_band(f2, bandwidth, shape, grid_spacing, "sub2");
  ModeSpec m;
  m.grid_spacing = grid_spacing;
  if (label.empty()) {
    label = "bichromatic_" + std::to_string(f1 * 1e-9) + "_" +
            std::to_string(f2 * 1e-9) + "GHz";
  }
  m.label = std::move(label);
  const int n = static_cast<int>(std::max(b1.values.size(), b2.values.size()));
  m.values = Eigen::ArrayXcd::Zero(n);
  m.values.head(b1.values.size()) += std::sqrt(1.0 - lambda) * b1.values;
  const std::complex<double> ph =
      std::polar(std::sqrt(lambda), rel_phase);
  m.values.head(b2.values.size()) += ph * b2.values;
  normalize(m);
  return m;
}

ModeSpec make_wideband(double f_lo, double f_hi, double grid_spacing,
                       std::string label) {
  if (!(f_hi > f_lo) || !(f_lo > 0.0)) {
    throw ConfigError("wideband mode requires f_hi > f_lo > 0");
  }
  if (!(grid_spacing > 0.0)) throw ConfigError("grid_spacing must be positive");
  ModeSpec m;
  m.grid_spacing = grid_spacing;
  if (label.empty()) {
    label = "wideband_" + std::to_string(f_lo * 1e-9) + "_" +
            std::to_string(f_hi * 1e-9) + "GHz";
  }
  m.label = std::move(label);
  const int n = static_cast<int>(std::ceil(f_hi / grid_spacing)) + 1;
  m.values = Eigen::ArrayXcd::Zero(n);
  bool any = false;
  for (int j = 0; j < n; ++j) {
    const double f = j * grid_spacing;
    if (f >= f_lo && f < f_hi) {
      m.values[j] = 1.0;
      any = true;
    }
  }
  if (!any) {
    // Narrower than one grid cell: single-bin mode at the band center.
    const int j = static_cast<int>(std::round((f_lo + f_hi) / 2 / grid_spacing));
    m.values[std::min(j, n - 1)] = 1.0;
  }
  normalize(m);
  return m;
}

std::complex<double> overlap(const ModeSpec& a, const ModeSpec& b) {
  if (std::abs(a.grid_spacing - b.grid_spacing) >
      1e-9 * std::max(a.grid_spacing, b.grid_spacing)) {
    throw ConfigError("overlap: mismatched mode grids");
  }
  const auto n = std::min(a.values.size(), b.values.size());
  const std::complex<double> s =
      (a.values.head(n).conjugate() * b.values.head(n)).sum();
  return s * a.grid_spacing;
}

nlohmann::json mode_to_json(const ModeSpec& mode) {
  nlohmann::json j;
  j["label"] = mode.label;
  j["grid_spacing"] = mode.grid_spacing;
  // Store the support only: first nonzero bin and the values that follow.
  int first = 0;
  int last = mode.bin_count() - 1;
  while (first <= last && std::abs(mode.values[first]) == 0.0) ++first;
  while (last >= first && std::abs(mode.values[last]) == 0.0) --last;
  j["first_bin"] = first;
  j["bin_count"] = mode.bin_count();
  nlohmann::json vals = nlohmann::json::array();
  for (int k = first; k <= last; ++k) {
    vals.push_back({mode.values[k].real(), mode.values[k].imag()});
  }
  j["bins"] = std::move(vals);
  return j;
}

ModeSpec mode_from_json(const nlohmann::json& j) {
  ModeSpec m;
  m.label = j.at("label").get<std::string>();
  m.grid_spacing = j.at("grid_spacing").get<double>();
  const int first = j.at("first_bin").get<int>();
  const auto& bins = j.at("bins");
  const int total = j.value("bin_count", first + static_cast<int>(bins.size()));
  m.values = Eigen::ArrayXcd::Zero(total);
  for (int k = 0; k < static_cast<int>(bins.size()); ++k) {
    m.values[first + k] = {bins[k][0].get<double>(), bins[k][1].get<double>()};
  }
  return m;
}

} // namespace bbpc
