#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace bbpc {

// Thin RAII wrapper around FFTW double-precision plans. Plan creation is
// serialized internally (FFTW plan functions are not thread safe); execution
// on the owned buffers is safe from the owning thread. Plans use FFTW_ESTIMATE
// so results are bit-reproducible across runs and workers.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t spectrum_size() const { return n_ / 2 + 1; }

  double* time() { return time_; }
  const double* time() const { return time_; }
  std::complex<double>* freq() { return reinterpret_cast<std::complex<double>*>(freq_); }
  const std::complex<double>* freq() const {
    return reinterpret_cast<const std::complex<double>*>(freq_);
  }

  // time -> freq (unnormalized, FFTW convention).
  void forward();
  // freq -> time (unnormalized; caller divides by n). Destroys freq buffer.
  void inverse();

 private:
  std::size_t n_;
  double* time_;
  void* freq_;   // fftw_complex*
  void* plan_fwd_;
  void* plan_inv_;
};

// Out-of-place complex DFT helper for one-shot uses (kernel construction).
// direction -1: forward exp(-2*pi*i*...), +1: inverse (unnormalized).
void complex_dft(std::vector<std::complex<double>>& data, int direction);

} // namespace bbpc
