#pragma once

#include <span>
#include <string>
#include <vector>

#include "wptrx/receiver_params.hpp"

namespace wptrx {

/// Virtual network-analyzer settings. Periods are perturbation periods.
struct ProbeConfig {
  double amp = 0.005;        // duty perturbation amplitude
  int settle_periods = 10;   // discarded before the measurement window
  int measure_periods = 8;   // correlation window length, >= 4
  double dt = 0.0;           // integrator step override; 0 -> period/500
};

struct ToneFit {
  double dc = 0.0;
  double amplitude = 0.0;
  double phase_deg = 0.0;  // of A*sin(2 pi f t + phase), in (-180, 180]
};

/// Least-squares fit of dc + tone at f_p over samples with t in [t0, t1).
/// The window must span an exact integer number of 1/f_p periods and hold at
/// least 20 samples per period; DC and other harmonics then drop out by
/// orthogonality.
ToneFit extract_tone(std::span<const double> t, std::span<const double> v,
                     double f_p, double t0, double t1);

struct ProbePoint {
  double freq_hz = 0.0;
  double mag_db = 0.0;
  double phase_deg = 0.0;  // in (-180, 180], relative to the measured duty tone
};

struct ProbeResult {
  double freq_hz = 0.0;  // snapped to an integer number of switching periods
  ProbePoint v_dc, i_l, v_o;
};

/// Injects d = d_nom + amp*sin(2 pi f_p t) into the switched model from the
/// steady operating point and extracts all three responses from one run.
/// f_p snaps to f_sw / round(f_sw / f_p); frequencies above f_sw/20 are
/// rejected (fewer than 20 cycle-average samples per perturbation period).
ProbeResult probe_point(const ReceiverParams& p, const ProbeConfig& cfg,
                        double f_p);

struct SweepRow {
  double freq_hz;
  std::string signal;  // v_dc | i_l | v_o
  double mag_db, phase_deg;
  double analytic_mag_db, analytic_phase_deg;
  double err_db, err_deg;
};

/// probe_point over a frequency list plus the analytic comparison columns.
/// Points are independent and run concurrently; rows come back in input
/// order (three rows per frequency). An empty list yields an empty table.
std::vector<SweepRow> frequency_sweep(const ReceiverParams& p,
                                      const ProbeConfig& cfg,
                                      const std::vector<double>& freqs);

}  // namespace wptrx
