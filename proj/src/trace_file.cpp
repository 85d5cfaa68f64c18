#include "bbpc/trace_file.hpp"

#include <cstdio>
#include <cstring>
#include <mutex>

#include "bbpc/errors.hpp"

namespace bbpc {

namespace {

constexpr char kMagic[4] = {'B', 'B', 'T', '1'};
constexpr std::size_t kHeaderBytes = 48;

static_assert(sizeof(double) == 8);

void pack_header(const TraceFileHeader& h, unsigned char* buf) {
  std::memcpy(buf, kMagic, 4);
  std::memcpy(buf + 4, &h.version, 4);
  std::memcpy(buf + 8, &h.bit_depth, 4);
  const uint32_t reserved = 0;
  std::memcpy(buf + 12, &reserved, 4);
  std::memcpy(buf + 16, &h.sample_rate, 8);
  std::memcpy(buf + 24, &h.scale, 8);
  std::memcpy(buf + 32, &h.sample_count, 8);
  std::memcpy(buf + 40, &h.segment_len, 8);
}

TraceFileHeader unpack_header(const unsigned char* buf) {
  if (std::memcmp(buf, kMagic, 4) != 0) {
    throw IoError("trace file: bad magic");
  }
  TraceFileHeader h;
  std::memcpy(&h.version, buf + 4, 4);
  std::memcpy(&h.bit_depth, buf + 8, 4);
  std::memcpy(&h.sample_rate, buf + 16, 8);
  std::memcpy(&h.scale, buf + 24, 8);
  std::memcpy(&h.sample_count, buf + 32, 8);
  std::memcpy(&h.segment_len, buf + 40, 8);
  if (h.version != 1) throw IoError("trace file: unsupported version");
  return h;
}

} // namespace

struct TraceWriter::Impl {
  std::FILE* f = nullptr;
  TraceFileHeader header;
  uint64_t written = 0;
  bool closed = false;
};

TraceWriter::TraceWriter(const std::string& path, const TraceFileHeader& header)
    : impl_(new Impl) {
  impl_->header = header;
  impl_->f = std::fopen(path.c_str(), "wb");
  if (!impl_->f) {
    delete impl_;
    throw IoError("cannot open trace file for writing: " + path);
  }
  unsigned char buf[kHeaderBytes];
  pack_header(impl_->header, buf);
  if (std::fwrite(buf, 1, kHeaderBytes, impl_->f) != kHeaderBytes) {
    std::fclose(impl_->f);
    delete impl_;
    throw IoError("trace header write failed");
  }
}

void TraceWriter::append(const TraceSegment& seg) {
  if (impl_->closed) throw IoError("trace writer already closed");
  if (std::fwrite(seg.codes.data(), sizeof(int16_t), seg.codes.size(),
                  impl_->f) != seg.codes.size()) {
    throw IoError("trace sample write failed");
  }
  impl_->written += seg.codes.size();
}

void TraceWriter::close() {
  if (impl_->closed) return;
  impl_->closed = true;
  impl_->header.sample_count = impl_->written;
  unsigned char buf[kHeaderBytes];
  pack_header(impl_->header, buf);
  std::fseek(impl_->f, 0, SEEK_SET);
  if (std::fwrite(buf, 1, kHeaderBytes, impl_->f) != kHeaderBytes) {
    throw IoError("trace header rewrite failed");
  }
  std::fclose(impl_->f);
  impl_->f = nullptr;
}

TraceWriter::~TraceWriter() {
  try {
    close();
  } catch (...) {
    if (impl_->f) std::fclose(impl_->f);
  }
  delete impl_;
}

struct TraceReader::Impl {
  std::FILE* f = nullptr;
  TraceFileHeader header;
  mutable std::mutex io;
};

TraceReader::TraceReader(const std::string& path) : impl_(new Impl) {
  impl_->f = std::fopen(path.c_str(), "rb");
  if (!impl_->f) {
    delete impl_;
    throw IoError("cannot open trace file: " + path);
  }
  unsigned char buf[kHeaderBytes];
  if (std::fread(buf, 1, kHeaderBytes, impl_->f) != kHeaderBytes) {
    std::fclose(impl_->f);
    delete impl_;
    throw IoError("trace header read failed");
  }
  try {
    impl_->header = unpack_header(buf);
  } catch (...) {
    std::fclose(impl_->f);
    delete impl_;
    throw;
  }
}

TraceReader::~TraceReader() {
  std::fclose(impl_->f);
  delete impl_;
}

const TraceFileHeader& TraceReader::header() const { return impl_->header; }

uint64_t TraceReader::segment_count() const {
  return impl_->header.segment_count();
}

TraceSegment TraceReader::read_segment(uint64_t index) const {
  const auto& h = impl_->header;
  if (index >= h.segment_count()) throw IoError("segment index out of range");
  const uint64_t begin = index * h.segment_len;
  const uint64_t len = std::min(h.segment_len, h.sample_count - begin);
  TraceSegment seg;
  seg.sample_rate = h.sample_rate;
  seg.scale = h.scale;
  seg.sequence_id = index;
  seg.codes.resize(len);
  std::lock_guard<std::mutex> lock(impl_->io);
  if (std::fseek(impl_->f, static_cast<long>(kHeaderBytes + begin * 2), SEEK_SET) != 0 ||
      std::fread(seg.codes.data(), sizeof(int16_t), len, impl_->f) != len) {
    throw IoError("trace segment read failed");
  }
  return seg;
}

} // namespace bbpc
