#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "bbpc/dsp.hpp"
#include "bbpc/quantum.hpp"
#include "bbpc/synth.hpp"
#include "bbpc/trace_file.hpp"

namespace bbpc {

// Pull-based segment source; get() must be thread-safe.
class SegmentSource {
 public:
  virtual ~SegmentSource() = default;
  virtual uint64_t segment_count() const = 0;
  virtual TraceSegment get(uint64_t index) const = 0;
  virtual double sample_rate() const = 0;
};

// Deterministic on-the-fly synthesis (per-segment seeds); optional chain.
class SynthSource : public SegmentSource {
 public:
  SynthSource(SpectralState state, SynthConfig cfg, uint64_t n_segments,
              std::optional<ChainModel> chain = std::nullopt);
  uint64_t segment_count() const override { return n_segments_; }
  TraceSegment get(uint64_t index) const override;
  double sample_rate() const override { return cfg_.sample_rate; }

 private:
  SpectralState state_;
  SynthConfig cfg_;
  uint64_t n_segments_;
  std::optional<ChainModel> chain_;
  double chain_scale_ = 0.0;
};

class FileSource : public SegmentSource {
 public:
  explicit FileSource(const std::string& path) : reader_(path) {}
  uint64_t segment_count() const override { return reader_.segment_count(); }
  TraceSegment get(uint64_t index) const override {
    return reader_.read_segment(index);
  }
  double sample_rate() const override { return reader_.header().sample_rate; }

 private:
  TraceReader reader_;
};

// Request cross statistics between two (x, p) kernel quadruples.
struct PairRequest {
  int xa = -1, pa = -1, xb = -1, pb = -1;  // indices into the kernel list
  double overlap_sq = 0.0;                 // |<beta_a|beta_b>|^2
};

struct AnalysisOptions {
  int block_size = 1 << 14;
  int workers = 0;           // 0: hardware concurrency (or BBPC_WORKERS)
  int superblocks = 64;      // grouping of segments for error bars
};

struct StreamResult {
  CumulantPair cumulants;
  MomentAccumulator merged;
  uint64_t segments = 0;
};

struct PairResult {
  PairMoments moments;
  PairAccumulator merged;
};

struct AnalysisOutput {
  std::vector<StreamResult> streams;  // one per kernel
  std::vector<PairResult> pairs;      // one per request
  double wall_seconds = 0.0;
  double samples_per_second = 0.0;    // input samples / wall time
  uint64_t total_samples = 0;
};

// Convolve every segment against all kernels (one shared forward FFT per
// block), accumulate moments per segment, merge deterministically in segment
// order, and estimate errors from >= `superblocks` groups of segments.
AnalysisOutput run_analysis(const SegmentSource& source,
                            const std::vector<const DiscreteKernel*>& kernels,
                            const std::vector<PairRequest>& pairs = {},
                            const AnalysisOptions& options = {});

int resolve_worker_count(int requested);

} // namespace bbpc
