#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bbpc/calib.hpp"
#include "bbpc/config.hpp"
#include "bbpc/constants.hpp"
#include "bbpc/errors.hpp"
#include "bbpc/pipeline.hpp"

namespace {

using namespace bbpc;

std::string hash_hex(uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open output file: " + path);
  return os;
}

void write_provenance_header(std::ostream& os, const RunConfig& cfg) {
  os << "# config_hash=" << hash_hex(cfg.hash()) << "\n";
  os << "# seed=" << cfg.seed << "\n";
}

struct KernelBank {
  std::vector<DiscreteKernel> storage;
  std::vector<const DiscreteKernel*> ptrs;

  int add(DiscreteKernel k) {
    storage.push_back(std::move(k));
    return static_cast<int>(storage.size()) - 1;
  }
  void finalize() {
    ptrs.clear();
    for (const auto& k : storage) ptrs.push_back(&k);
  }
};

Eigen::ArrayXd inverse_gain_on_grid(const RunConfig& cfg, const ModeSpec& mode) {
  if (!cfg.chain || !cfg.chain->has_gain()) return {};
  Eigen::ArrayXd ig(mode.values.size());
  for (int j = 0; j < mode.bin_count(); ++j) {
    ig[j] = cfg.chain->inverse_amplitude_gain(mode.freq(j));
  }
  return ig;
}

DiscreteKernel build_kernel(const RunConfig& cfg, const ModeSpec& mode,
                            double theta) {
  KernelConfig kc;
  kc.sample_rate = cfg.sample_rate;
  kc.n_taps = cfg.n_taps;
  kc.impedance = cfg.impedance;
  kc.theta = theta;
  return compose(mode, kc, inverse_gain_on_grid(cfg, mode), cfg.dc_guard);
}

AnalysisOptions analysis_options(const RunConfig& cfg) {
  AnalysisOptions o;
  o.block_size = cfg.block_size;
  o.workers = cfg.workers;
  o.superblocks = cfg.superblocks;
  return o;
}

int cmd_synth(const RunConfig& cfg, const std::string& out_path) {
  SpectralState state =
      cfg.build_state(cfg.sample_rate / static_cast<double>(cfg.segment_samples));
  SynthConfig sc{cfg.sample_rate, cfg.impedance, cfg.seed, cfg.segment_samples};
  const ChainModel* chain = cfg.chain ? &*cfg.chain : nullptr;
  const uint64_t written =
      synth_to_file(out_path, state, sc, cfg.segments, chain);
  nlohmann::json side;
  side["config_hash"] = hash_hex(cfg.hash());
  side["seed"] = cfg.seed;
  side["samples"] = written;
  side["segments"] = cfg.segments;
  side["trace"] = out_path;
  auto os = open_out(out_path + ".json");
  os << side.dump(2) << "\n";
  std::cout << "wrote " << written << " samples to " << out_path << "\n";
  return 0;
}

struct ModeAnalysis {
  std::string label;
  PhotonStats stats;
  SqueezingEstimate sq;
};

int cmd_analyze(const RunConfig& cfg, const std::string& trace_path,
                const std::string& ref_path, const std::string& out_path) {
  if (cfg.modes.empty()) throw ConfigError("no modes configured");
  KernelBank bank;
  std::vector<std::string> labels;
  for (const auto& req : cfg.modes) {
    ModeSpec mode = req.build(cfg.kernel_grid());
    labels.push_back(mode.label);
    bank.add(build_kernel(cfg, mode, 0.0));
  }
  bank.finalize();

  FileSource source(trace_path);
  AnalysisOutput out = run_analysis(source, bank.ptrs, {}, analysis_options(cfg));

  std::vector<CumulantPair> cumulants;
  for (const auto& s : out.streams) cumulants.push_back(s.cumulants);
  if (!ref_path.empty()) {
    FileSource ref(ref_path);
    AnalysisOutput rout = run_analysis(ref, bank.ptrs, {}, analysis_options(cfg));
    for (std::size_t i = 0; i < cumulants.size(); ++i) {
      cumulants[i] = reference_subtract(cumulants[i], rout.streams[i].cumulants);
    }
  }

  auto os = open_out(out_path);
  write_provenance_header(os, cfg);
  os << "label,n,n_err,var_n,var_n_err,fano,fano_err,m,m_err,v_minus_db,"
        "v_minus_db_err,count\n";
  bool bad = false;
  for (std::size_t i = 0; i < cumulants.size(); ++i) {
    const PhotonStats st = photon_stats(cumulants[i]);
    const SqueezingEstimate sq = m_and_variances(st);
    os << labels[i] << "," << st.n << "," << st.n_err << "," << st.var_n << ","
       << st.var_n_err << "," << st.fano << "," << st.fano_err << "," << sq.m
       << "," << sq.m_err << "," << sq.squeezing_db << ","
       << sq.squeezing_db_err << "," << st.count << "\n";
    if (st.n < -3.0 * st.n_err - 1e-12) bad = true;
  }
  std::cout << "analyzed " << out.total_samples << " samples at "
            << out.samples_per_second / 1e6 << " MSa/s\n";
  if (bad) {
    std::cerr << "invariant violation: mean photon number below the "
                 "statistical floor\n";
    return 3;
  }
  return 0;
}

// Shared measurement for spectrum/entangle/steer: for each sweep point f
// (lower arm, delta_f = fp/2 - f) build A(f), B(fp-f) monochromatic kernels
// plus the combined bichromatic and wideband kernels, one trace pass total.
struct SweepPoint {
  double f = 0.0;
  double delta_f = 0.0;
  PhotonStats bich, wide, mono_a, mono_b;
  SqueezingEstimate bich_sq, wide_sq;
  ModePrediction bich_th, wide_th, bich_th_disp, wide_th_disp;
};

std::vector<SweepPoint> run_sweep(const RunConfig& cfg) {
  if (cfg.source.type != "junction" && cfg.source.f_pump <= 0.0) {
    throw ConfigError("sweep commands need a paired source (junction or f_pump)");
  }
  const double fp = cfg.source.type == "junction" ? cfg.source.junction.f_pump
                                                  : cfg.source.f_pump;
  const double center = fp / 2.0;
  KernelBank bank;
  struct Entry {
    double f;
    int bich, wide, a, b;
  };
  std::vector<Entry> entries;
  std::vector<ModeSpec> bich_modes, wide_modes;
  for (int i = 0; i < cfg.sweep_steps; ++i) {
    const double f =
        cfg.sweep_lo + (cfg.sweep_hi - cfg.sweep_lo) *
                           (cfg.sweep_steps == 1
                                ? 0.0
                                : double(i) / (cfg.sweep_steps - 1));
    const double f2 = fp - f;
    Entry e;
    e.f = f;
    ModeSpec bich = make_bichromatic(f, f2, cfg.sweep_bandwidth, 0.5, 0.0,
                                     SubbandShape::Rect, cfg.kernel_grid());
    ModeSpec wide = make_wideband(f, f2, cfg.kernel_grid());
    ModeSpec ma = make_monochromatic(f, cfg.sweep_bandwidth, SubbandShape::Rect,
                                     cfg.kernel_grid());
    ModeSpec mb = make_monochromatic(f2, cfg.sweep_bandwidth, SubbandShape::Rect,
                                     cfg.kernel_grid());
    e.bich = bank.add(build_kernel(cfg, bich, 0.0));
    e.wide = bank.add(build_kernel(cfg, wide, 0.0));
    e.a = bank.add(build_kernel(cfg, ma, 0.0));
    e.b = bank.add(build_kernel(cfg, mb, 0.0));
    entries.push_back(e);
    bich_modes.push_back(std::move(bich));
    wide_modes.push_back(std::move(wide));
  }
  bank.finalize();

  SpectralState state =
      cfg.build_state(cfg.sample_rate / static_cast<double>(cfg.segment_samples));
  SynthConfig sc{cfg.sample_rate, cfg.impedance, cfg.seed, cfg.segment_samples};
  SynthSource source(state, sc, cfg.segments,
                     cfg.chain ? std::optional<ChainModel>(*cfg.chain)
                               : std::nullopt);
  AnalysisOutput out = run_analysis(source, bank.ptrs, {}, analysis_options(cfg));

  // Theory on a fine pump-aligned grid.
  const double df_fine = fp / 12000.0;
  SpectralState th_state = cfg.build_state(df_fine);
  DispersionModel no_disp;
  DispersionModel disp =
      cfg.chain ? cfg.chain->dispersion : DispersionModel{};

  std::vector<SweepPoint> points;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    SweepPoint p;
    p.f = e.f;
    p.delta_f = center - e.f;
    p.bich = photon_stats(out.streams[e.bich].cumulants);
    p.wide = photon_stats(out.streams[e.wide].cumulants);
    p.mono_a = photon_stats(out.streams[e.a].cumulants);
    p.mono_b = photon_stats(out.streams[e.b].cumulants);
    p.bich_sq = m_and_variances(p.bich);
    p.wide_sq = m_and_variances(p.wide);
    ModeSpec bich_f = make_bichromatic(e.f, fp - e.f, cfg.sweep_bandwidth, 0.5,
                                       0.0, SubbandShape::Rect, df_fine);
    ModeSpec wide_f = make_wideband(e.f, fp - e.f, df_fine);
    p.bich_th = predict(bich_f, th_state, no_disp);
    p.wide_th = predict(wide_f, th_state, no_disp);
    p.bich_th_disp = predict(bich_f, th_state, disp);
    p.wide_th_disp = predict(wide_f, th_state, disp);
    points.push_back(p);
  }
  return points;
}

int cmd_spectrum(const RunConfig& cfg, const std::string& out_path) {
  auto points = run_sweep(cfg);
  auto os = open_out(out_path);
  write_provenance_header(os, cfg);
  os << "f,delta_f,bich_m,bich_m_err,bich_v_minus_db,bich_v_minus_db_err,"
        "wide_m,wide_m_err,wide_v_minus_db,wide_v_minus_db_err,"
        "bich_m_theory,bich_m_theory_disp,wide_m_theory,wide_m_theory_disp\n";
  for (const auto& p : points) {
    os << p.f << "," << p.delta_f << "," << p.bich_sq.m << ","
       << p.bich_sq.m_err << "," << p.bich_sq.squeezing_db << ","
       << p.bich_sq.squeezing_db_err << "," << p.wide_sq.m << ","
       << p.wide_sq.m_err << "," << p.wide_sq.squeezing_db << ","
       << p.wide_sq.squeezing_db_err << "," << p.bich_th.m << ","
       << p.bich_th_disp.m << "," << p.wide_th.m << "," << p.wide_th_disp.m
       << "\n";
  }
  return 0;
}

int cmd_entangle(const RunConfig& cfg, const std::string& out_path) {
  auto points = run_sweep(cfg);
  std::vector<std::pair<double, double>> ef_bich, ef_wide;
  auto os = open_out(out_path);
  write_provenance_header(os, cfg);
  os << "delta_f,ef_bich,ef_wide,rate_bich,rate_wide,ef_bich_theory,"
        "ef_wide_theory\n";
  std::vector<double> th_b, th_w;
  for (const auto& p : points) {
    const auto gb_b = make_bipartite(p.mono_a.n, p.mono_b.n, p.bich_sq.m,
                                     p.bich_sq.m_err);
    const auto gb_w = make_bipartite(p.mono_a.n, p.mono_b.n, p.wide_sq.m,
                                     p.wide_sq.m_err);
    ef_bich.push_back({p.delta_f, entanglement_of_formation(gb_b)});
    ef_wide.push_back({p.delta_f, entanglement_of_formation(gb_w)});
    th_b.push_back(entanglement_of_formation(
        make_bipartite(p.bich_th.n, p.bich_th.n, p.bich_th.m, 1.0)));
    th_w.push_back(entanglement_of_formation(
        make_bipartite(p.wide_th.n, p.wide_th.n, p.wide_th.m, 1.0)));
  }
  auto rate_b = entanglement_rate(ef_bich, RateKind::Bichromatic);
  auto rate_w = entanglement_rate(ef_wide, RateKind::Wideband);
  for (std::size_t i = 0; i < points.size(); ++i) {
    os << points[i].delta_f << "," << ef_bich[i].second << ","
       << ef_wide[i].second << "," << rate_b[i].rate << "," << rate_w[i].rate
       << "," << th_b[i] << "," << th_w[i] << "\n";
  }
  return 0;
}

int cmd_steer(const RunConfig& cfg, const std::string& out_path) {
  auto points = run_sweep(cfg);
  auto os = open_out(out_path);
  write_provenance_header(os, cfg);
  os << "delta_f,kind,n_a,n_b,m,eta,mu,mu_a,mu_b,g_a_to_b,g_b_to_a,class\n";
  for (const auto& p : points) {
    for (int kind = 0; kind < 2; ++kind) {
      const auto& sq = kind == 0 ? p.bich_sq : p.wide_sq;
      const auto gb = make_bipartite(p.mono_a.n, p.mono_b.n, sq.m, sq.m_err);
      const SteeringResult st = steering(gb);
      os << p.delta_f << "," << (kind == 0 ? "bichromatic" : "wideband") << ","
         << gb.n_a << "," << gb.n_b << "," << gb.m << "," << st.eta << ","
         << st.mu << "," << st.mu_a << "," << st.mu_b << "," << st.g_a_to_b
         << "," << st.g_b_to_a << "," << to_string(st.cls) << "\n";
    }
  }
  return 0;
}

int cmd_calibrate(const std::string& psd_path, double r_ohms,
                  const std::string& out_path) {
  std::ifstream in(psd_path);
  if (!in) throw IoError("cannot open PSD csv: " + psd_path);
  const auto points = read_psd_csv(in);
  const CalibResult result = fit_thermometry(points, r_ohms);
  nlohmann::json j;
  j["te"] = result.te;
  j["te_err"] = result.te_err;
  j["residual_rms"] = result.residual_rms;
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : result.bins) {
    bins.push_back({{"f", b.f},
                    {"gain_db", b.gain_db},
                    {"noise_temp", b.noise_temp},
                    {"te_local", b.te_local}});
  }
  j["bins"] = bins;
  auto os = open_out(out_path);
  os << j.dump(2) << "\n";
  auto csv = open_out(out_path + ".csv");
  write_calib_csv(result, csv);
  std::cout << "Te = " << result.te * 1e3 << " mK (+- " << result.te_err * 1e3
            << ")\n";
  return 0;
}

int cmd_bench(const RunConfig& cfg, const std::string& out_path) {
  RunConfig c = cfg;
  if (c.modes.empty()) {
    for (double f0 : {4e9, 5e9, 7e9, 8e9}) {
      ModeRequest m;
      m.type = "monochromatic";
      m.f0 = f0;
      m.bandwidth = 200e6;
      c.modes.push_back(m);
    }
  }
  KernelBank bank;
  for (const auto& req : c.modes) {
    bank.add(build_kernel(c, req.build(c.kernel_grid()), 0.0));
  }
  bank.finalize();
  SpectralState state =
      c.build_state(c.sample_rate / static_cast<double>(c.segment_samples));
  SynthConfig sc{c.sample_rate, c.impedance, c.seed, c.segment_samples};
  SynthSource source(state, sc, c.segments);

  auto os = open_out(out_path);
  write_provenance_header(os, c);
  os << "workers,samples_per_s,msa_per_core\n";
  const int max_workers = resolve_worker_count(c.workers);
  for (int w = 1; w <= max_workers; w *= 2) {
    AnalysisOptions opt = analysis_options(c);
    opt.workers = w;
    AnalysisOutput out = run_analysis(source, bank.ptrs, {}, opt);
    os << w << "," << out.samples_per_second << ","
       << out.samples_per_second / w / 1e6 << "\n";
    std::cout << w << " workers: " << out.samples_per_second / 1e6
              << " MSa/s total, " << out.samples_per_second / w / 1e6
              << " MSa/s per core (" << bank.ptrs.size() << " modes, "
              << c.n_taps << " taps)\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"broadband microwave photon counting toolkit"};
  app.require_subcommand(1);

  std::string config_path, trace_path, ref_path, out_path, psd_path;
  double r_ohms = 52.5;

  auto* synth = app.add_subcommand("synth", "synthesize a voltage trace file");
  synth->add_option("--config", config_path)->required();
  synth->add_option("--out", out_path)->required();

  auto* analyze = app.add_subcommand("analyze", "photocount statistics per mode");
  analyze->add_option("--config", config_path)->required();
  analyze->add_option("--trace", trace_path)->required();
  analyze->add_option("--reference", ref_path);
  analyze->add_option("--out", out_path)->required();

  auto* spectrum = app.add_subcommand("spectrum", "squeezing spectrum sweep");
  spectrum->add_option("--config", config_path)->required();
  spectrum->add_option("--out", out_path)->required();

  auto* entangle = app.add_subcommand("entangle", "entanglement of formation and rates");
  entangle->add_option("--config", config_path)->required();
  entangle->add_option("--out", out_path)->required();

  auto* steer = app.add_subcommand("steer", "steering classification sweep");
  steer->add_option("--config", config_path)->required();
  steer->add_option("--out", out_path)->required();

  auto* calibrate = app.add_subcommand("calibrate", "shot-noise thermometry fit");
  calibrate->add_option("--psd", psd_path)->required();
  calibrate->add_option("--r", r_ohms);
  calibrate->add_option("--out", out_path)->required();

  auto* bench = app.add_subcommand("bench", "engine throughput");
  bench->add_option("--config", config_path)->required();
  bench->add_option("--out", out_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (calibrate->parsed()) return cmd_calibrate(psd_path, r_ohms, out_path);
    const bbpc::RunConfig cfg = bbpc::load_config(config_path);
    if (synth->parsed()) return cmd_synth(cfg, out_path);
    if (analyze->parsed()) return cmd_analyze(cfg, trace_path, ref_path, out_path);
    if (spectrum->parsed()) return cmd_spectrum(cfg, out_path);
    if (entangle->parsed()) return cmd_entangle(cfg, out_path);
    if (steer->parsed()) return cmd_steer(cfg, out_path);
    if (bench->parsed()) return cmd_bench(cfg, out_path);
  } catch (const bbpc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const bbpc::PhysicalityError& e) {
    std::cerr << "physicality error: " << e.what() << "\n";
    return 3;
  } catch (const bbpc::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
