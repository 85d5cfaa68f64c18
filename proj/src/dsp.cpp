#include "bbpc/dsp.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

#include "bbpc/errors.hpp"

namespace bbpc {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void check_same_provenance(uint64_t a, uint64_t b, const char* what) {
  if (a != 0 && b != 0 && a != b) {
    throw ConfigError(std::string("merge: provenance mismatch in ") + what);
  }
}
} // namespace

void MomentAccumulator::add(std::span<const double> x) {
  double s2 = 0.0, s4 = 0.0;
  for (double v : x) {
    const double v2 = v * v;
    s2 += v2;
    s4 += v2 * v2;
  }
  sum_x2.add(s2);
  sum_x4.add(s4);
  count += x.size();
}

void MomentAccumulator::add(std::span<const double> x,
                            std::span<const double> p) {
  if (x.size() != p.size()) throw ConfigError("misaligned x/p streams");
  has_p = true;
  double s2 = 0.0, s4 = 0.0, t2 = 0.0, t4 = 0.0, c22 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x2 = x[i] * x[i];
    const double p2 = p[i] * p[i];
    s2 += x2;
    s4 += x2 * x2;
    t2 += p2;
    t4 += p2 * p2;
    c22 += x2 * p2;
  }
  sum_x2.add(s2);
  sum_x4.add(s4);
  sum_p2.add(t2);
  sum_p4.add(t4);
  sum_x2p2.add(c22);
  count += x.size();
}

MomentAccumulator merge(const MomentAccumulator& a, const MomentAccumulator& b) {
  check_same_provenance(a.provenance, b.provenance, "MomentAccumulator");
  if (a.has_p != b.has_p && a.count && b.count) {
    throw ConfigError("merge: one accumulator lacks the p stream");
  }
  MomentAccumulator out = a;
  out.count += b.count;
  out.sum_x2.merge(b.sum_x2);
  out.sum_x4.merge(b.sum_x4);
  out.sum_p2.merge(b.sum_p2);
  out.sum_p4.merge(b.sum_p4);
  out.sum_x2p2.merge(b.sum_x2p2);
  out.has_p = a.has_p || b.has_p;
  out.edge_discarded += b.edge_discarded;
  if (out.provenance == 0) out.provenance = b.provenance;
  return out;
}

void PairAccumulator::add(std::span<const double> xa, std::span<const double> pa,
                          std::span<const double> xb,
                          std::span<const double> pb) {
  if (xa.size() != pa.size() || xa.size() != xb.size() ||
      xa.size() != pb.size()) {
    throw ConfigError("pair accumulation: misaligned streams");
  }
  mode_a.add(xa, pa);
  mode_b.add(xb, pb);
  double qa_s = 0.0, qb_s = 0.0, qaqb = 0.0, qa2 = 0.0, qb2 = 0.0, xpxp = 0.0;
  for (std::size_t i = 0; i < xa.size(); ++i) {
    const double qa = 0.5 * (xa[i] * xa[i] + pa[i] * pa[i]);
    const double qb = 0.5 * (xb[i] * xb[i] + pb[i] * pb[i]);
    qa_s += qa;
    qb_s += qb;
    qaqb += qa * qb;
    qa2 += qa * qa;
    qb2 += qb * qb;
    xpxp += xa[i] * pa[i] * xb[i] * pb[i];
  }
  sum_qa.add(qa_s);
  sum_qb.add(qb_s);
  sum_qa_qb.add(qaqb);
  sum_qa2.add(qa2);
  sum_qb2.add(qb2);
  sum_xa_pa_xb_pb.add(xpxp);
  count += xa.size();
}

PairAccumulator merge(const PairAccumulator& a, const PairAccumulator& b) {
  check_same_provenance(a.provenance, b.provenance, "PairAccumulator");
  PairAccumulator out = a;
  out.count += b.count;
  out.mode_a = merge(a.mode_a, b.mode_a);
  out.mode_b = merge(a.mode_b, b.mode_b);
  out.sum_qa.merge(b.sum_qa);
  out.sum_qb.merge(b.sum_qb);
  out.sum_qa_qb.merge(b.sum_qa_qb);
  out.sum_qa2.merge(b.sum_qa2);
  out.sum_qb2.merge(b.sum_qb2);
  out.sum_xa_pa_xb_pb.merge(b.sum_xa_pa_xb_pb);
  if (out.provenance == 0) out.provenance = b.provenance;
  return out;
}

struct MultiConvolver::Fft {
  explicit Fft(int n) : n(n) {
    time = fftw_alloc_real(n);
    freq = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd = fftw_plan_dft_r2c_1d(n, time, freq, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(n, freq, time, FFTW_ESTIMATE);
  }
  ~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(time);
    fftw_free(freq);
  }
  int n;
  double* time;
  fftw_complex* freq;
  fftw_plan fwd;
  fftw_plan inv;
};

MultiConvolver::MultiConvolver(const std::vector<const DiscreteKernel*>& kernels,
                               int block_size)
    : block_(block_size) {
  if (kernels.empty()) throw ConfigError("MultiConvolver needs >= 1 kernel");
  n_taps_ = static_cast<int>(kernels.front()->taps.size());
  for (const auto* k : kernels) {
    if (static_cast<int>(k->taps.size()) != n_taps_ ||
        k->center_index != kernels.front()->center_index) {
      throw ConfigError("all kernels in one pass must share tap layout");
    }
  }
  if (n_taps_ >= block_) throw ConfigError("kernel longer than FFT block");
  step_ = block_ - n_taps_ + 1;
  fwd_ = std::make_unique<Fft>(block_);
  const int nspec = block_ / 2 + 1;
  for (const auto* k : kernels) {
    // Tap spectrum, folded with the 1/N inverse-FFT normalization.
    for (int i = 0; i < block_; ++i) {
      fwd_->time[i] = i < n_taps_ ? k->taps[i] / block_ : 0.0;
    }
    fftw_execute(fwd_->fwd);
    Eigen::ArrayXcd h(nspec);
    std::memcpy(h.data(), fwd_->freq, sizeof(fftw_complex) * nspec);
    spectra_.push_back(std::move(h));
    inv_.push_back(std::make_unique<Fft>(block_));
    carry_.emplace_back(static_cast<std::size_t>(n_taps_ - 1), 0.0);
    out_.emplace_back(static_cast<std::size_t>(step_), 0.0);
  }
}

MultiConvolver::~MultiConvolver() = default;

void MultiConvolver::process(std::span<const double> x, const Sink& sink) {
  const auto n = static_cast<long>(x.size());
  if (n < n_taps_) return;  // nothing fully overlapped
  // Causal convolution y has n + K - 1 samples; the valid quadrature stream is
  // y[K-1 .. n-1], i.e. n - (K-1) samples starting at input index `half`.
  const long valid_begin = n_taps_ - 1;
  const long valid_end = n;  // exclusive, in causal-output coordinates
  for (auto& c : carry_) std::fill(c.begin(), c.end(), 0.0);

  std::vector<std::span<const double>> chunks(spectra_.size());
  const int nspec = block_ / 2 + 1;
  long pos = 0;  // causal-output index of the next block start
  while (pos < n) {
    const int cur = static_cast<int>(std::min<long>(step_, n - pos));
    for (int i = 0; i < cur; ++i) fwd_->time[i] = x[pos + i];
    std::memset(fwd_->time + cur, 0, sizeof(double) * (block_ - cur));
    fftw_execute(fwd_->fwd);
    for (std::size_t k = 0; k < spectra_.size(); ++k) {
      const auto* src = reinterpret_cast<const std::complex<double>*>(fwd_->freq);
      auto* dst = reinterpret_cast<std::complex<double>*>(inv_[k]->freq);
      const std::complex<double>* h = spectra_[k].data();
      for (int q = 0; q < nspec; ++q) dst[q] = src[q] * h[q];
      fftw_execute(inv_[k]->inv);
      // Assemble causal outputs [pos, pos+cur) and update the carry tail.
      double* y = inv_[k]->time;
      auto& carry = carry_[k];
      auto& out = out_[k];
      const int tail = n_taps_ - 1;
      for (int i = 0; i < cur; ++i) {
        out[i] = y[i] + (i < tail ? carry[i] : 0.0);
      }
      for (int i = 0; i < tail; ++i) {
        const int j = cur + i;
        carry[i] = (j < block_ ? y[j] : 0.0) + (j < tail ? carry[j] : 0.0);
      }
      // Clip to the valid window.
      const long emit_begin = std::max<long>(pos, valid_begin);
      const long emit_end = std::min<long>(pos + cur, valid_end);
      if (emit_begin < emit_end) {
        chunks[k] = std::span<const double>(out.data() + (emit_begin - pos),
                                            static_cast<std::size_t>(emit_end - emit_begin));
      } else {
        chunks[k] = {};
      }
    }
    if (!chunks.front().empty()) sink(chunks);
    pos += cur;
  }
}

std::vector<double> convolve_valid(std::span<const double> x,
                                   const DiscreteKernel& kernel,
                                   int block_size) {
  MultiConvolver conv({&kernel}, block_size);
  std::vector<double> out;
  out.reserve(x.size());
  conv.process(x, [&](const std::vector<std::span<const double>>& chunks) {
    out.insert(out.end(), chunks[0].begin(), chunks[0].end());
  });
  return out;
}

} // namespace bbpc
