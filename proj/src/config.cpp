#include "bbpc/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "bbpc/constants.hpp"
#include "bbpc/errors.hpp"

namespace bbpc {

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ModeSpec ModeRequest::build(double grid_spacing) const {
  if (type == "monochromatic") {
    return make_monochromatic(f0, bandwidth, shape, grid_spacing, label);
  }
  if (type == "bichromatic") {
    return make_bichromatic(f1, f2, bandwidth, lambda, rel_phase, shape,
                            grid_spacing, label);
  }
  if (type == "wideband") {
    return make_wideband(f_lo, f_hi, grid_spacing, label);
  }
  throw ConfigError("unknown mode type: " + type);
}

SpectralState RunConfig::build_state(double grid_spacing) const {
  const double f_max = sample_rate / 2.0;
  if (source.type == "vacuum") {
    return uniform_state(0.0, 0.0, 0.0, grid_spacing, f_max);
  }
  if (source.type == "uniform") {
    return uniform_state(source.n, source.f_lo, source.f_hi, grid_spacing,
                         f_max, source.m, source.f_pump);
  }
  if (source.type == "junction") {
    return junction_state(source.junction, grid_spacing, f_max, band_lo,
                          band_hi);
  }
  if (source.type == "csv") {
    std::ifstream in(source.path);
    if (!in) throw IoError("cannot open state csv: " + source.path);
    return read_state_csv(in, source.f_pump);
  }
  throw ConfigError("unknown source type: " + source.type);
}

void RunConfig::validate() const {
  if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be positive");
  if (n_taps % 2 == 0 || n_taps < 3) throw ConfigError("n_taps must be odd >= 3");
  if (!(band_lo >= dc_guard)) {
    throw ConfigError("band_lo below the dc guard");
  }
  if (!(band_hi <= sample_rate / 2.0)) {
    throw ConfigError("band_hi beyond Nyquist");
  }
  if (segment_samples < static_cast<uint64_t>(2 * n_taps)) {
    throw ConfigError("segments shorter than the kernel support");
  }
  for (const auto& m : modes) {
    ModeSpec spec = m.build(kernel_grid());
    if (spec.support_min() < band_lo - kernel_grid() ||
        spec.support_max() > band_hi + kernel_grid()) {
      throw ConfigError("mode '" + spec.label + "' outside the analysis band");
    }
  }
}

namespace {

SubbandShape shape_from(const std::string& s) {
  if (s == "rect") return SubbandShape::Rect;
  if (s == "raised-cosine") return SubbandShape::RaisedCosine;
  throw ConfigError("unknown sub-band shape: " + s);
}

std::string shape_to(SubbandShape s) {
  return s == SubbandShape::Rect ? "rect" : "raised-cosine";
}

FrequencyCurve curve_from(const nlohmann::json& j) {
  FrequencyCurve c;
  if (j.is_number()) {
    c.knots.push_back({0.0, j.get<double>()});
  } else {
    for (const auto& knot : j) {
      c.knots.push_back({knot[0].get<double>(), knot[1].get<double>()});
    }
  }
  return c;
}

nlohmann::json curve_to(const FrequencyCurve& c) {
  if (c.knots.size() == 1) return c.knots.front().second;
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [f, v] : c.knots) j.push_back({f, v});
  return j;
}

} // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  c.sample_rate = j.value("sample_rate", c.sample_rate);
  c.impedance = j.value("impedance", c.impedance);
  c.seed = j.value("seed", c.seed);
  c.segment_samples = j.value("segment_samples", c.segment_samples);
  c.segments = j.value("segments", c.segments);
  if (j.contains("band")) {
    c.band_lo = j["band"][0].get<double>();
    c.band_hi = j["band"][1].get<double>();
  }
  c.dc_guard = j.value("dc_guard", c.dc_guard);
  c.n_taps = j.value("n_taps", c.n_taps);
  c.block_size = j.value("block_size", c.block_size);
  c.workers = j.value("workers", c.workers);
  c.superblocks = j.value("superblocks", c.superblocks);
  c.with_p = j.value("with_p", c.with_p);
  c.output_dir = j.value("output_dir", c.output_dir);
  if (j.contains("source")) {
    const auto& s = j["source"];
    c.source.type = s.value("type", c.source.type);
    c.source.n = s.value("n", 0.0);
    c.source.m = s.value("m", 0.0);
    c.source.f_lo = s.value("f_lo", 0.0);
    c.source.f_hi = s.value("f_hi", 0.0);
    c.source.path = s.value("path", std::string{});
    c.source.f_pump = s.value("f_pump", 0.0);
    if (c.source.type == "junction") {
      auto& m = c.source.junction;
      m.resistance = s.value("resistance", m.resistance);
      m.electron_temp = s.value("electron_temp", m.electron_temp);
      m.f_pump = s.value("f_pump", m.f_pump);
      m.i_ac_rms = s.value("i_ac_rms", m.i_ac_rms);
      if (s.value("v_dc_half_pump", false)) {
        m.v_dc = kPlanck * m.f_pump / (2.0 * kElementaryCharge);
      } else {
        m.v_dc = s.value("v_dc", m.v_dc);
      }
    }
  }
  if (j.contains("chain")) {
    const auto& ch = j["chain"];
    ChainModel chain;
    chain.impedance = c.impedance;
    if (ch.contains("gain_db")) chain.gain_db = curve_from(ch["gain_db"]);
    if (ch.contains("noise_temp")) chain.noise_temp = curve_from(ch["noise_temp"]);
    if (ch.contains("dispersion_total_pi")) {
      const double lo = ch.value("dispersion_f_lo", 1e9);
      const double hi = ch.value("dispersion_f_hi", 10e9);
      chain.dispersion = DispersionModel::from_total_rotation(
          ch["dispersion_total_pi"].get<double>() * kPi, lo, hi);
    }
    chain.adc_bits = ch.value("adc_bits", 0);
    chain.adc_fullscale = ch.value("adc_fullscale", 0.0);
    chain.adc_epsilon = ch.value("adc_epsilon", 0.0);
    c.chain = chain;
  }
  if (j.contains("modes")) {
    for (const auto& mj : j["modes"]) {
      ModeRequest m;
      m.type = mj.at("type").get<std::string>();
      m.f0 = mj.value("f0", 0.0);
      m.f1 = mj.value("f1", 0.0);
      m.f2 = mj.value("f2", 0.0);
      m.bandwidth = mj.value("bandwidth", m.bandwidth);
      m.f_lo = mj.value("f_lo", 0.0);
      m.f_hi = mj.value("f_hi", 0.0);
      m.lambda = mj.value("lambda", 0.5);
      m.rel_phase = mj.value("rel_phase", 0.0);
      m.shape = shape_from(mj.value("shape", std::string("rect")));
      m.label = mj.value("label", std::string{});
      c.modes.push_back(std::move(m));
    }
  }
  if (j.contains("sweep")) {
    const auto& sw = j["sweep"];
    c.sweep_lo = sw.value("f_lo", c.sweep_lo);
    c.sweep_hi = sw.value("f_hi", c.sweep_hi);
    c.sweep_steps = sw.value("steps", c.sweep_steps);
    c.sweep_bandwidth = sw.value("bandwidth", c.sweep_bandwidth);
  }
  c.lambda_steps = j.value("lambda_steps", c.lambda_steps);
  return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["sample_rate"] = c.sample_rate;
  j["impedance"] = c.impedance;
  j["seed"] = c.seed;
  j["segment_samples"] = c.segment_samples;
  j["segments"] = c.segments;
  j["band"] = {c.band_lo, c.band_hi};
  j["dc_guard"] = c.dc_guard;
  j["n_taps"] = c.n_taps;
  j["block_size"] = c.block_size;
  j["workers"] = c.workers;
  j["superblocks"] = c.superblocks;
  j["with_p"] = c.with_p;
  j["output_dir"] = c.output_dir;
  nlohmann::json s;
  s["type"] = c.source.type;
  if (c.source.type == "uniform") {
    s["n"] = c.source.n;
    s["m"] = c.source.m;
    s["f_lo"] = c.source.f_lo;
    s["f_hi"] = c.source.f_hi;
    s["f_pump"] = c.source.f_pump;
  } else if (c.source.type == "junction") {
    s["resistance"] = c.source.junction.resistance;
    s["electron_temp"] = c.source.junction.electron_temp;
    s["v_dc"] = c.source.junction.v_dc;
    s["i_ac_rms"] = c.source.junction.i_ac_rms;
    s["f_pump"] = c.source.junction.f_pump;
  } else if (c.source.type == "csv") {
    s["path"] = c.source.path;
    s["f_pump"] = c.source.f_pump;
  }
  j["source"] = s;
  if (c.chain) {
    nlohmann::json ch;
    ch["gain_db"] = curve_to(c.chain->gain_db);
    ch["noise_temp"] = curve_to(c.chain->noise_temp);
    if (c.chain->dispersion.alpha != 0.0) {
      ch["dispersion_alpha"] = c.chain->dispersion.alpha;
      ch["dispersion_f_ref"] = c.chain->dispersion.f_ref;
    }
    ch["adc_bits"] = c.chain->adc_bits;
    ch["adc_fullscale"] = c.chain->adc_fullscale;
    ch["adc_epsilon"] = c.chain->adc_epsilon;
    j["chain"] = ch;
  }
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : c.modes) {
    nlohmann::json mj;
    mj["type"] = m.type;
    if (m.type == "monochromatic") {
      mj["f0"] = m.f0;
      mj["bandwidth"] = m.bandwidth;
    } else if (m.type == "bichromatic") {
      mj["f1"] = m.f1;
      mj["f2"] = m.f2;
      mj["bandwidth"] = m.bandwidth;
      mj["lambda"] = m.lambda;
      mj["rel_phase"] = m.rel_phase;
    } else {
      mj["f_lo"] = m.f_lo;
      mj["f_hi"] = m.f_hi;
    }
    mj["shape"] = shape_to(m.shape);
    mj["label"] = m.label;
    modes.push_back(mj);
  }
  j["modes"] = modes;
  j["sweep"] = {{"f_lo", c.sweep_lo},
                {"f_hi", c.sweep_hi},
                {"steps", c.sweep_steps},
                {"bandwidth", c.sweep_bandwidth}};
  j["lambda_steps"] = c.lambda_steps;
  return j;
}

std::string RunConfig::canonical_json() const {
  return config_to_json(*this).dump();
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig c = config_from_json(j);
  c.validate();
  return c;
}

} // namespace bbpc
