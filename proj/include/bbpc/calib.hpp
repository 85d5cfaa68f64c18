#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bbpc {

// One measured noise-spectral-density sample: frequency bin, dc bias current,
// PSD in digitizer units (the gain soaks up the absolute scale).
struct PsdPoint {
  double f = 0.0;
  double i_dc = 0.0;
  double psd = 0.0;
};

struct CalibBin {
  double f = 0.0;
  double gain_db = 0.0;
  double noise_temp = 0.0;   // K
  double te_local = 0.0;     // per-bin electron temperature (diagnostic)
  double residual_rms = 0.0;
};

struct CalibResult {
  double te = 0.0;      // shared electron temperature, K
  double te_err = 0.0;
  std::vector<CalibBin> bins;
  double residual_rms = 0.0;

  double gain_db_at(double f) const;
  double noise_temp_at(double f) const;
};

// Shot-noise thermometry: per frequency bin, least squares of
// PSD = a(f) [S2(f, I R, Te) + 2 k T_N(f) / R], first with per-bin Te
// (diagnostic), then refined with one Te shared across bins.
// Requires >= 7 bias points spanning the thermal-to-shot crossover and
// >= 2 frequency bins.
CalibResult fit_thermometry(const std::vector<PsdPoint>& spectra, double r_ohms);

// Acquisition schedule interlacing conditions with references
// (I_dc = 0, I_ac = 0): R c1 R c2 ... R.
struct ScheduleEntry {
  bool is_reference = true;
  int condition = -1;  // index into the conditions list
};
std::vector<ScheduleEntry> interlace_plan(int n_conditions, int ref_period);

// CSV io: rows f,i_dc,psd.
std::vector<PsdPoint> read_psd_csv(std::istream& is);
void write_calib_csv(const CalibResult& r, std::ostream& os);

} // namespace bbpc
