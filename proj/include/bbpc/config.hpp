#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "bbpc/junction.hpp"
#include "bbpc/modes.hpp"
#include "bbpc/synth.hpp"

namespace bbpc {

uint64_t fnv1a64(const std::string& bytes);

struct ModeRequest {
  std::string type;  // monochromatic | bichromatic | wideband
  double f0 = 0.0, f1 = 0.0, f2 = 0.0;
  double bandwidth = 200e6;
  double f_lo = 0.0, f_hi = 0.0;
  double lambda = 0.5;
  double rel_phase = 0.0;
  SubbandShape shape = SubbandShape::Rect;
  std::string label;

  ModeSpec build(double grid_spacing) const;
};

struct SourceConfig {
  std::string type = "vacuum";  // vacuum | uniform | junction | csv
  // uniform
  double n = 0.0;
  double m = 0.0;
  double f_lo = 0.0, f_hi = 0.0;
  // junction
  JunctionModel junction;
  // csv
  std::string path;
  double f_pump = 0.0;  // pairing (uniform/csv); junction carries its own
};

struct RunConfig {
  double sample_rate = 32e9;
  double impedance = 50.0;
  uint64_t seed = 1;
  uint64_t segment_samples = 1 << 22;
  uint64_t segments = 16;
  double band_lo = 1e9;
  double band_hi = 10e9;
  double dc_guard = 100e6;
  int n_taps = 257;
  int block_size = 1 << 14;
  int workers = 0;
  int superblocks = 64;
  bool with_p = false;  // also build pi/2 kernels and pair statistics
  SourceConfig source;
  std::optional<ChainModel> chain;
  std::vector<ModeRequest> modes;
  // Frequency sweeps (spectrum / entangle / steer).
  double sweep_lo = 2.25e9;
  double sweep_hi = 5.75e9;
  int sweep_steps = 8;
  double sweep_bandwidth = 200e6;
  int lambda_steps = 21;
  std::string output_dir = ".";

  std::string canonical_json() const;
  uint64_t hash() const { return fnv1a64(canonical_json()); }

  // Kernel-grid spacing: sample_rate / n_taps, so modes are exactly
  // representable by the tap count.
  double kernel_grid() const { return sample_rate / n_taps; }

  SpectralState build_state(double grid_spacing) const;
  void validate() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const std::string& path);

} // namespace bbpc
