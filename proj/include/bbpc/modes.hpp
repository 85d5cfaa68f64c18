#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace bbpc {

enum class SubbandShape { Rect, RaisedCosine };

// A normalized frequency-domain mode function beta(f), sampled on a uniform
// grid f_j = j * grid_spacing for j = 0..n-1 (positive frequencies only; the
// negative-frequency content is implied by beta(-f) = conj(beta(f))).
// Invariant: sum |beta_j|^2 * grid_spacing == 1.
struct ModeSpec {
  double grid_spacing = 0.0;  // Hz
  Eigen::ArrayXcd values;     // beta(f_j), units 1/sqrt(Hz)
  std::string label;

  int bin_count() const { return static_cast<int>(values.size()); }
  double freq(int j) const { return j * grid_spacing; }

  // Squared norm, sum |beta|^2 df. 1 after construction.
  double norm_sq() const;

  // Support bounds (first/last bin with nonzero amplitude), in Hz.
  double support_min() const;
  double support_max() const;

  // beta at an arbitrary frequency, linear interpolation between bins.
  std::complex<double> sample(double f) const;
};

// Flat or raised-cosine sub-band of the given width centered on f0.
// Bins with f in [f0 - bw/2, f0 + bw/2) belong to the band.
ModeSpec make_monochromatic(double f0, double bandwidth, SubbandShape shape,
                            double grid_spacing, std::string label = {});

// beta = sqrt(1-lambda) beta1 + e^{i rel_phase} sqrt(lambda) beta2 with
// beta1, beta2 individually normalized sub-bands at f1 and f2.
// Requires |f2 - f1| > bandwidth so the sub-bands do not overlap.
ModeSpec make_bichromatic(double f1, double f2, double bandwidth, double lambda,
                          double rel_phase, SubbandShape shape,
                          double grid_spacing, std::string label = {});

// |beta|^2 = 1/(f_hi - f_lo) on [f_lo, f_hi), zero phase.
ModeSpec make_wideband(double f_lo, double f_hi, double grid_spacing,
                       std::string label = {});

// sum conj(a) * b * df. Requires identical grids.
std::complex<double> overlap(const ModeSpec& a, const ModeSpec& b);

// Structured text (JSON) round-trip for configs and provenance logs.
nlohmann::json mode_to_json(const ModeSpec& mode);
ModeSpec mode_from_json(const nlohmann::json& j);

} // namespace bbpc
