#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace bbpc {

// Time-averaged quadrature cumulants of one stream, with superblock error
// estimates. c2 = <x^2>, c4 = <x^4> - 3 <x^2>^2.
struct CumulantPair {
  double c2 = 0.0;
  double c4 = 0.0;
  double c2_err = 0.0;
  double c4_err = 0.0;
  double cov_c2_c4 = 0.0;
  uint64_t count = 0;
  uint64_t kernel_hash = 0;  // provenance; reference subtraction requires a match
};

struct PhotonStats {
  double n = 0.0;
  double var_n = 0.0;
  double fano = 0.0;
  double n_err = 0.0;
  double var_n_err = 0.0;
  double fano_err = 0.0;
  double cov_n_var = 0.0;
  uint64_t count = 0;
};

// n = <x^2> - 1/2, var_n = (2/3)<x^4> - <x^2>^2 - 1/4.
PhotonStats photon_stats(const CumulantPair& acc);

// Sample-only cumulants from interlaced condition/reference acquisitions:
// C2_s = C2_cond - C2_ref + 1/2 (the re-added 1/2 restores the vacuum the
// reference contains), C4_s = C4_cond - C4_ref.
CumulantPair reference_subtract(const CumulantPair& cond,
                                const CumulantPair& ref);

struct SqueezingEstimate {
  double m = 0.0;             // sqrt(max(0, var_n - n(n+1)))
  double v_minus = 0.5;       // n + 1/2 - m
  double v_plus = 0.5;
  double squeezing_db = 0.0;  // 10 log10(v_minus / (1/2))
  double m_err = 0.0;
  double v_minus_err = 0.0;
  double squeezing_db_err = 0.0;
  bool below_thermal = false;  // var_n < n(n+1): m clamped to zero
};

// Gaussian-source inversion of the photocount statistics.
SqueezingEstimate m_and_variances(const PhotonStats& stats);

// Cross statistics of two modes measured jointly.
struct PairStats {
  double corr = 0.0;           // <dn1 dn2>
  double corr_err = 0.0;
  double var_n_quarter = 0.0;  // <dN^2>/4 via Eq-style split
  double var_n_quarter_err = 0.0;
  PhotonStats mode_a, mode_b;
};

// Inputs are the time-averaged intensity cross moments (q = (x^2+p^2)/2):
// corr = <qa qb> - <qa><qb> - overlap_sq/4. The overlap term removes the
// vacuum double-counting when the two "modes" are not orthogonal (it is zero
// for disjoint bands and 1 for identical streams).
struct PairMoments {
  double mean_qa = 0.0, mean_qb = 0.0, mean_qa_qb = 0.0;
  double err_qa_qb = 0.0;   // superblock stderr of the covariance
  CumulantPair a_x, b_x;    // per-mode x-stream cumulants (Eq.-7 route)
  uint64_t count = 0;
};
PairStats pair_stats(const PairMoments& m, double overlap_sq = 0.0);

// Two-mode Gaussian state in the standard form
// sigma = [[(nA+1/2) I, diag(m,-m)], [diag(m,-m), (nB+1/2) I]].
struct GaussianBipartite {
  double n_a = 0.0;
  double n_b = 0.0;
  double m = 0.0;
  bool clamped = false;  // m clipped to the physical bound

  Eigen::Matrix4d covariance() const;  // (X_A, P_A, X_B, P_B), vacuum = 1/2
};

// Symmetrized physical bound min(nA(nB+1), nB(nA+1)); m beyond it within
// tolerance is clamped (flagged), beyond 3 sigma it throws.
GaussianBipartite make_bipartite(double n_a, double n_b, double m,
                                 double m_tolerance = 0.0);

// Smallest symplectic eigenvalue of the partial transpose.
double ppt_symplectic_min(const GaussianBipartite& gb);

// Entanglement of formation (bits/mode) for the symmetric two-mode Gaussian
// formula evaluated on the PPT eigenvalue. Zero when 2 nu >= 1.
double entanglement_of_formation(const GaussianBipartite& gb);
// Same, flagging use on asymmetric states.
struct EofResult {
  double e_f = 0.0;
  bool asymmetric_estimate = false;  // |nA-nB|/(nA+nB) > 0.1
};
EofResult entanglement_of_formation_checked(const GaussianBipartite& gb);

enum class SteeringClass {
  Separable,
  Entangled,
  SteerableAtoB,
  SteerableBtoA,
  TwoWay,
};
const char* to_string(SteeringClass c);

struct SteeringResult {
  double eta = 0.0;       // mu_A mu_B / mu
  double mu = 0.0, mu_a = 0.0, mu_b = 0.0;
  double g_a_to_b = 0.0;  // Gaussian steering monotone
  double g_b_to_a = 0.0;
  SteeringClass cls = SteeringClass::Separable;
};
SteeringResult steering(const GaussianBipartite& gb);

// Entanglement rate from an E_f(delta_f) curve. Bichromatic modes integrate
// (2 * int_0^df E_f dnu, trapezoid); wideband modes carry 2 * df * E_f(df).
enum class RateKind { Bichromatic, Wideband };
struct RatePoint {
  double delta_f = 0.0;
  double rate = 0.0;  // ebit/s
};
std::vector<RatePoint> entanglement_rate(
    const std::vector<std::pair<double, double>>& ef_curve, RateKind kind);

// Duan-style inseparability scan over the mode-weight parameter lambda.
struct DuanResult {
  std::vector<bool> inseparable;  // V_-(lambda) < 1/2 per sample
  double lambda_star = 0.0;       // argmin V_-
  double v_min = 0.5;
  bool any = false;
};
DuanResult duan_check(const std::vector<std::pair<double, double>>& v_minus_curve);
// Mapping between the Duan parameter a and lambda = a^4 / (1 + a^4).
double duan_lambda_from_a(double a);
double duan_a_from_lambda(double lambda);

// Linearity witness: fit c4 = alpha c2 + beta over a drive sweep.
struct LinearityReport {
  double alpha = 0.0;
  double alpha_err = 0.0;
  double beta = 0.0;
  bool linear = false;  // alpha consistent with zero at 3 sigma
};
LinearityReport c4_vs_c2_diagnostic(
    const std::vector<std::pair<double, double>>& points,
    const std::vector<double>* c4_errors = nullptr);

} // namespace bbpc
