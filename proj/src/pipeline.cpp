#include "bbpc/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "bbpc/errors.hpp"
#include "bbpc/rng.hpp"

namespace bbpc {

SynthSource::SynthSource(SpectralState state, SynthConfig cfg,
                         uint64_t n_segments, std::optional<ChainModel> chain)
    : state_(std::move(state)),
      cfg_(cfg),
      n_segments_(n_segments),
      chain_(std::move(chain)) {
  if (chain_) {
    // Fix the storage scale once so all segments share it.
    TraceSegment probe = synth_segment(state_, cfg_, 0);
    apply_chain(probe, *chain_, derive_segment_seed(cfg_.seed ^ 0xA5A5A5A5ULL, 0));
    chain_scale_ = probe.scale;
  }
}

TraceSegment SynthSource::get(uint64_t index) const {
  TraceSegment seg = synth_segment(state_, cfg_, index);
  if (chain_) {
    apply_chain(seg, *chain_,
                derive_segment_seed(cfg_.seed ^ 0xA5A5A5A5ULL, index),
                chain_scale_);
  }
  return seg;
}

int resolve_worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BBPC_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

namespace {

struct SegmentStats {
  std::vector<MomentAccumulator> streams;
  std::vector<PairAccumulator> pairs;
  uint64_t samples = 0;
};

SegmentStats process_segment(const TraceSegment& seg,
                             const std::vector<const DiscreteKernel*>& kernels,
                             const std::vector<PairRequest>& pair_req,
                             MultiConvolver& conv) {
  SegmentStats st;
  st.streams.resize(kernels.size());
  st.pairs.resize(pair_req.size());
  const std::vector<double> x = seg.decode();
  st.samples = x.size();
  conv.process(x, [&](const std::vector<std::span<const double>>& chunks) {
    for (std::size_t k = 0; k < chunks.size(); ++k) {
      st.streams[k].add(chunks[k]);
    }
    for (std::size_t p = 0; p < pair_req.size(); ++p) {
      const auto& r = pair_req[p];
      st.pairs[p].add(chunks[r.xa], chunks[r.pa], chunks[r.xb], chunks[r.pb]);
    }
  });
  const auto edge = static_cast<uint64_t>(conv.taps() - 1);
  for (auto& s : st.streams) s.edge_discarded += edge;
  return st;
}

// Mean and superblock stderr of per-group values (groups weighted equally;
// segments have equal length so this matches the sample-weighted mean).
struct BlockEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

BlockEstimate block_estimate(const std::vector<double>& groups) {
  BlockEstimate e;
  const std::size_t s = groups.size();
  if (s == 0) return e;
  double m = 0.0;
  for (double v : groups) m += v;
  m /= static_cast<double>(s);
  e.mean = m;
  if (s > 1) {
    double var = 0.0;
    for (double v : groups) var += (v - m) * (v - m);
    var /= static_cast<double>(s - 1);
    e.stderr_mean = std::sqrt(var / static_cast<double>(s));
  }
  return e;
}

double block_cov(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t s = a.size();
  if (s < 2) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= s;
  mb /= s;
  double c = 0.0;
  for (std::size_t i = 0; i < s; ++i) c += (a[i] - ma) * (b[i] - mb);
  return c / static_cast<double>(s - 1) / static_cast<double>(s);
}

} // namespace

AnalysisOutput run_analysis(const SegmentSource& source,
                            const std::vector<const DiscreteKernel*>& kernels,
                            const std::vector<PairRequest>& pair_req,
                            const AnalysisOptions& options) {
  const uint64_t n_seg = source.segment_count();
  if (n_seg == 0) throw ConfigError("no segments to analyze");
  for (const auto& r : pair_req) {
    const int n = static_cast<int>(kernels.size());
    if (r.xa < 0 || r.pa < 0 || r.xb < 0 || r.pb < 0 || r.xa >= n ||
        r.pa >= n || r.xb >= n || r.pb >= n) {
      throw ConfigError("pair request indexes outside the kernel list");
    }
  }
  const int workers =
      static_cast<int>(std::min<uint64_t>(resolve_worker_count(options.workers), n_seg));

  std::vector<SegmentStats> per_segment(n_seg);
  std::atomic<uint64_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  const auto t0 = std::chrono::steady_clock::now();
  auto work = [&]() {
    try {
      MultiConvolver conv(kernels, options.block_size);
      while (true) {
        const uint64_t i = next.fetch_add(1);
        if (i >= n_seg) break;
        per_segment[i] =
            process_segment(source.get(i), kernels, pair_req, conv);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  const auto t1 = std::chrono::steady_clock::now();

  AnalysisOutput out;
  out.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  for (const auto& seg : per_segment) out.total_samples += seg.samples;
  out.samples_per_second =
      out.wall_seconds > 0 ? out.total_samples / out.wall_seconds : 0.0;

  // Deterministic merge in segment order, then superblock error estimates.
  const auto n_groups =
      std::min<uint64_t>(n_seg, static_cast<uint64_t>(options.superblocks));
  auto group_of = [&](uint64_t seg) { return seg * n_groups / n_seg; };

  out.streams.resize(kernels.size());
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    MomentAccumulator merged;
    std::vector<MomentAccumulator> groups(n_groups);
    for (uint64_t i = 0; i < n_seg; ++i) {
      merged = merge(merged, per_segment[i].streams[k]);
      groups[group_of(i)] =
          merge(groups[group_of(i)], per_segment[i].streams[k]);
    }
    std::vector<double> g_c2, g_c4;
    for (const auto& g : groups) {
      if (g.count == 0) continue;
      const double c2 = g.mean_x2();
      g_c2.push_back(c2);
      g_c4.push_back(g.mean_x4() - 3.0 * c2 * c2);
    }
    StreamResult res;
    res.merged = merged;
    res.segments = n_seg;
    const double c2 = merged.mean_x2();
    res.cumulants.c2 = c2;
    res.cumulants.c4 = merged.mean_x4() - 3.0 * c2 * c2;
    res.cumulants.count = merged.count;
    res.cumulants.c2_err = block_estimate(g_c2).stderr_mean;
    res.cumulants.c4_err = block_estimate(g_c4).stderr_mean;
    res.cumulants.cov_c2_c4 = block_cov(g_c2, g_c4);
    out.streams[k] = std::move(res);
  }

  out.pairs.resize(pair_req.size());
  for (std::size_t p = 0; p < pair_req.size(); ++p) {
    PairAccumulator merged;
    std::vector<PairAccumulator> groups(n_groups);
    for (uint64_t i = 0; i < n_seg; ++i) {
      merged = merge(merged, per_segment[i].pairs[p]);
      groups[group_of(i)] = merge(groups[group_of(i)], per_segment[i].pairs[p]);
    }
    PairResult res;
    res.merged = merged;
    auto& mom = res.moments;
    mom.count = merged.count;
    if (merged.count) {
      mom.mean_qa = merged.sum_qa.value() / merged.count;
      mom.mean_qb = merged.sum_qb.value() / merged.count;
      mom.mean_qa_qb = merged.sum_qa_qb.value() / merged.count;
    }
    std::vector<double> g_cov;
    for (const auto& g : groups) {
      if (g.count == 0) continue;
      const double qa = g.sum_qa.value() / g.count;
      const double qb = g.sum_qb.value() / g.count;
      g_cov.push_back(g.sum_qa_qb.value() / g.count - qa * qb);
    }
    mom.err_qa_qb = block_estimate(g_cov).stderr_mean;
    mom.a_x = out.streams[pair_req[p].xa].cumulants;
    mom.b_x = out.streams[pair_req[p].xb].cumulants;
    out.pairs[p] = std::move(res);
  }
  return out;
}

} // namespace bbpc
