#include "bbpc/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace bbpc {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
} // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  time_ = fftw_alloc_real(n);
  freq_ = fftw_alloc_complex(n / 2 + 1);
  if (!time_ || !freq_) throw std::bad_alloc();
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), time_,
                                   static_cast<fftw_complex*>(freq_),
                                   FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                   static_cast<fftw_complex*>(freq_), time_,
                                   FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(time_);
  fftw_free(freq_);
}

void RealFft::forward() { fftw_execute(static_cast<fftw_plan>(plan_fwd_)); }
void RealFft::inverse() { fftw_execute(static_cast<fftw_plan>(plan_inv_)); }

void complex_dft(std::vector<std::complex<double>>& data, int direction) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()),
                            reinterpret_cast<fftw_complex*>(data.data()),
                            reinterpret_cast<fftw_complex*>(data.data()),
                            direction < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

} // namespace bbpc
