#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "bbpc/config.hpp"
#include "bbpc/errors.hpp"
#include "bbpc/pipeline.hpp"

using namespace bbpc;

namespace {

nlohmann::json base_config() {
  nlohmann::json j;
  j["sample_rate"] = 32e9;
  j["seed"] = 12;
  j["segment_samples"] = 1 << 18;
  j["segments"] = 4;
  j["band"] = {1e9, 10e9};
  j["source"] = {{"type", "uniform"}, {"n", 1.0}, {"f_lo", 3e9},
                 {"f_hi", 9e9}};
  j["modes"] = {{{"type", "monochromatic"}, {"f0", 4e9}, {"bandwidth", 2e8}}};
  return j;
}

} // namespace

TEST_CASE("config round-trips losslessly and hashes deterministically") {
  const RunConfig a = config_from_json(base_config());
  const RunConfig b = config_from_json(config_to_json(a));
  CHECK(a.canonical_json() == b.canonical_json());
  CHECK(a.hash() == b.hash());
  RunConfig c = a;
  c.seed = 13;
  CHECK(c.hash() != a.hash());
}

TEST_CASE("config validation rejects out-of-band setups") {
  auto j = base_config();
  j["band"] = {1e9, 20e9};  // beyond Nyquist
  CHECK_THROWS_AS(config_from_json(j).validate(), ConfigError);
  auto j2 = base_config();
  j2["modes"] = {{{"type", "monochromatic"}, {"f0", 0.5e9}, {"bandwidth", 2e8}}};
  CHECK_THROWS_AS(config_from_json(j2).validate(), ConfigError);
  auto j3 = base_config();
  j3["band"] = {1e7, 10e9};  // below the dc guard
  CHECK_THROWS_AS(config_from_json(j3).validate(), ConfigError);
}

TEST_CASE("junction source config builds a paired state") {
  auto j = base_config();
  j["source"] = {{"type", "junction"},     {"resistance", 52.5},
                 {"electron_temp", 17e-3}, {"f_pump", 12e9},
                 {"i_ac_rms", 0.43e-6},    {"v_dc_half_pump", true}};
  const RunConfig cfg = config_from_json(j);
  cfg.validate();
  const SpectralState st = cfg.build_state(2e6);
  CHECK(st.f_pump == 12e9);
  CHECK(st.n_at(6e9) > 0.0);
  CHECK(std::abs(st.m_at(6e9)) > 0.0);
}

TEST_CASE("worker count resolution honors the environment override") {
  const int def = resolve_worker_count(0);
  CHECK(def >= 1);
  CHECK(resolve_worker_count(3) == 3);
  setenv("BBPC_WORKERS", "2", 1);
  CHECK(resolve_worker_count(0) == 2);
  unsetenv("BBPC_WORKERS");
}

TEST_CASE("analysis output is identical for 1 and 3 workers") {
  const RunConfig cfg = config_from_json(base_config());
  const SpectralState st = cfg.build_state(
      cfg.sample_rate / static_cast<double>(cfg.segment_samples));
  SynthConfig sc{cfg.sample_rate, cfg.impedance, cfg.seed, cfg.segment_samples};
  SynthSource source(st, sc, 6);
  KernelConfig kc;
  kc.sample_rate = cfg.sample_rate;
  kc.n_taps = cfg.n_taps;
  kc.impedance = cfg.impedance;
  const ModeSpec mode = cfg.modes[0].build(cfg.kernel_grid());
  const DiscreteKernel k = compose(mode, kc);
  AnalysisOptions o1;
  o1.workers = 1;
  AnalysisOptions o3;
  o3.workers = 3;
  const AnalysisOutput a = run_analysis(source, {&k}, {}, o1);
  const AnalysisOutput b = run_analysis(source, {&k}, {}, o3);
  // Bit-identical merges regardless of worker count.
  CHECK(a.streams[0].merged.sum_x2.value() == b.streams[0].merged.sum_x2.value());
  CHECK(a.streams[0].merged.sum_x4.value() == b.streams[0].merged.sum_x4.value());
  CHECK(a.streams[0].merged.count == b.streams[0].merged.count);
}

TEST_CASE("config file loading reports missing files as io errors") {
  CHECK_THROWS_AS(load_config("/nonexistent/nope.json"), IoError);
  const std::string path = "/tmp/bbpc_cfg_test.json";
  {
    std::ofstream os(path);
    os << base_config().dump();
  }
  const RunConfig cfg = load_config(path);
  CHECK(cfg.seed == 12);
  {
    std::ofstream os(path);
    os << "{ not json";
  }
  CHECK_THROWS_AS(load_config(path), ConfigError);
}
