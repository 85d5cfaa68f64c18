#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bbpc {

// One contiguous run of digitizer samples. Segments are statistically
// independent acquisitions; the analysis discards (n_taps-1)/2 samples at
// every segment boundary instead of stitching.
struct TraceSegment {
  std::vector<int16_t> codes;
  double sample_rate = 0.0;
  double scale = 0.0;  // volts per code
  uint64_t sequence_id = 0;

  std::vector<double> decode() const {
    std::vector<double> v(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) v[i] = codes[i] * scale;
    return v;
  }
};

// Binary trace format (documented byte-exactly in docs/trace_format.md):
//   offset 0   char[4]  magic "BBT1"
//   offset 4   u32      version (1)
//   offset 8   u32      bit_depth
//   offset 12  u32      reserved (0)
//   offset 16  f64      sample_rate  [Hz]
//   offset 24  f64      scale        [V/code]
//   offset 32  u64      sample_count
//   offset 40  u64      segment_len  [samples per segment]
//   offset 48  i16[]    samples, little endian
struct TraceFileHeader {
  uint32_t version = 1;
  uint32_t bit_depth = 16;
  double sample_rate = 0.0;
  double scale = 0.0;
  uint64_t sample_count = 0;
  uint64_t segment_len = 0;

  uint64_t segment_count() const {
    return segment_len ? (sample_count + segment_len - 1) / segment_len : 0;
  }
};

class TraceWriter {
 public:
  TraceWriter(const std::string& path, const TraceFileHeader& header);
  ~TraceWriter();
  TraceWriter(const TraceWriter&) = delete;
  TraceWriter& operator=(const TraceWriter&) = delete;

  // Segments must arrive in order and match header.segment_len (the last may
  // be shorter).
  void append(const TraceSegment& seg);
  void close();  // rewrites the header with the final sample count

 private:
  struct Impl;
  Impl* impl_;
};

class TraceReader {
 public:
  explicit TraceReader(const std::string& path);
  ~TraceReader();
  TraceReader(const TraceReader&) = delete;
  TraceReader& operator=(const TraceReader&) = delete;

  const TraceFileHeader& header() const;
  uint64_t segment_count() const;
  TraceSegment read_segment(uint64_t index) const;  // thread-safe

 private:
  struct Impl;
  Impl* impl_;
};

} // namespace bbpc
