#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "bbpc/kernels.hpp"

namespace bbpc {

// Compensated (Neumaier) accumulator. merge() is exact in the carried
// compensation and commutative.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  void merge(const KahanSum& other) {
    const double t = sum + other.sum;
    comp += std::abs(sum) >= std::abs(other.sum) ? (sum - t) + other.sum
                                                 : (other.sum - t) + sum;
    comp += other.comp;
    sum = t;
  }
  double value() const { return sum + comp; }
};

// Streaming sums of x^2 and x^4 (and of the companion p stream when present).
// Sample counts, exact merge, compensated summation: x^4 sums over 1e12
// samples keep full double precision.
struct MomentAccumulator {
  uint64_t count = 0;
  KahanSum sum_x2, sum_x4;
  bool has_p = false;
  KahanSum sum_p2, sum_p4, sum_x2p2;
  uint64_t edge_discarded = 0;
  uint64_t provenance = 0;  // kernel/config hash; merge requires a match

  void add(std::span<const double> x);
  void add(std::span<const double> x, std::span<const double> p);

  double mean_x2() const { return count ? sum_x2.value() / count : 0.0; }
  double mean_x4() const { return count ? sum_x4.value() / count : 0.0; }
};

MomentAccumulator merge(const MomentAccumulator& a, const MomentAccumulator& b);

// Cross statistics between two modes, each measured through an (x, p)
// quadrature pair: instantaneous intensities q = (x^2 + p^2)/2 and their
// products.
struct PairAccumulator {
  uint64_t count = 0;
  MomentAccumulator mode_a, mode_b;  // each carries its x and p sums
  KahanSum sum_qa, sum_qb, sum_qa_qb, sum_qa2, sum_qb2;
  KahanSum sum_xa_pa_xb_pb;
  uint64_t provenance = 0;

  void add(std::span<const double> xa, std::span<const double> pa,
           std::span<const double> xb, std::span<const double> pb);
};

PairAccumulator merge(const PairAccumulator& a, const PairAccumulator& b);

// Overlap-add FFT convolution of one input stream against several kernels at
// once; the forward block transform is shared across kernels. All kernels
// must have the same tap count and center. Output samples are the fully
// overlapped ("valid") region of the segment: the first and last
// (n_taps-1)/2 samples are discarded, and chunks are emitted aligned across
// kernels.
class MultiConvolver {
 public:
  MultiConvolver(const std::vector<const DiscreteKernel*>& kernels,
                 int block_size = 1 << 14);
  ~MultiConvolver();
  MultiConvolver(const MultiConvolver&) = delete;
  MultiConvolver& operator=(const MultiConvolver&) = delete;

  int kernel_count() const { return static_cast<int>(spectra_.size()); }
  int taps() const { return n_taps_; }

  // Sink receives one aligned chunk per kernel.
  using Sink = std::function<void(const std::vector<std::span<const double>>&)>;
  void process(std::span<const double> x, const Sink& sink);

 private:
  struct Fft;
  int block_;     // FFT size N
  int n_taps_;    // K
  int step_;      // L = N - K + 1 input samples per block
  std::unique_ptr<Fft> fwd_;
  std::vector<std::unique_ptr<Fft>> inv_;
  std::vector<Eigen::ArrayXcd> spectra_;       // H_k / N
  std::vector<std::vector<double>> carry_;     // per kernel, K-1 samples
  std::vector<std::vector<double>> out_;       // per kernel, block staging
};

// One-kernel convenience: returns the valid quadrature samples of a segment.
std::vector<double> convolve_valid(std::span<const double> x,
                                   const DiscreteKernel& kernel,
                                   int block_size = 1 << 14);

} // namespace bbpc
