#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

#include "bbpc/modes.hpp"

namespace bbpc {

// Fresnel integrals C(u) = int_0^u cos(pi x^2/2) dx and S(u) likewise with sin.
// Absolute error below 1e-12 for all u.
struct FresnelCS {
  double c = 0.0;
  double s = 0.0;
};
FresnelCS fresnel(double u);

struct KernelConfig {
  double sample_rate = 32e9;   // Hz; Nyquist = sample_rate / 2
  int n_taps = 257;            // odd
  double impedance = 50.0;     // ohms
  double theta = 0.0;          // quadrature angle, 0 or pi/2
};

// Finished time-domain tap array. center_index marks t = 0; the filter is
// non-causal (taps extend to negative times) and the convolution engine
// honors the alignment. For composed kernels the taps are scaled so that the
// convolution output is a dimensionless quadrature with vacuum variance 1/2.
struct DiscreteKernel {
  Eigen::ArrayXd taps;
  int center_index = 0;
  double sample_rate = 0.0;
  std::string provenance;
  // Diagnostics filled by compose():
  double vacuum_gain = 1.0;              // rescale applied to pin vacuum at 1/2
  double window_energy_fraction = 1.0;   // kept tap energy / full response
};

// Appendix-style discretized bare kernels k_theta(n dt): raw closed-form
// values (no dt weighting); theta must be 0 or pi/2.
DiscreteKernel quadrature_kernel(const KernelConfig& cfg);

// Build the finished taps for one mode: frequency response
// k_theta(f) * beta(f) / |g(f)|, inverse transformed on the mode grid,
// truncated to n_taps and rescaled so that white voltage noise of vacuum
// spectral density produces <x^2> = 1/2 exactly.
// inverse_gain holds |g|^-1 sampled on the mode grid (empty means g == 1).
// Modes with weight below dc_guard are rejected (the kernel has an f = 0
// pole that the mode must cancel).
DiscreteKernel compose(const ModeSpec& mode, const KernelConfig& cfg,
                       const Eigen::ArrayXd& inverse_gain = {},
                       double dc_guard = 100e6);

// DTFT of the taps at frequency f (analog Hz, |f| <= Nyquist).
std::complex<double> kernel_response(const DiscreteKernel& k, double f);

// (index, tap) rows for inspection and cross-language regression fixtures.
void write_kernel_csv(const DiscreteKernel& k, std::ostream& os);

} // namespace bbpc
