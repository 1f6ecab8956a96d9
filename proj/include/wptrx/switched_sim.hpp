#pragma once

#include <functional>
#include <vector>

#include "wptrx/receiver_params.hpp"

namespace wptrx {

struct SwitchedState {
  double v_dc = 0.0;
  double i_l = 0.0;
  double v_o = 0.0;
};

enum class DutyMode { constant, step, sine, controller };
enum class InitMode { steady, zero, custom };
enum class PlantKind { wpt, voltage_source };
enum class SimVerdict { completed, diverged };

/// Duty program and run controls for the switched simulation.
struct Scenario {
  DutyMode mode = DutyMode::constant;
  double d0 = 0.5;             // base duty
  double step_time = 5e-3;     // step mode: applied from the next period start
  double d_after = 0.475;
  double sine_amp = 0.005;     // sine mode: d0 + amp*sin(2*pi*f*t), sampled at nT
  double sine_freq = 2000.0;
  /// controller mode: called once per period with (period index, nT, state at nT);
  /// returned duty is clamped to [0.02, 0.98].
  std::function<double(long, double, const SwitchedState&)> controller;

  double duration = 20e-3;
  double dt = 0.0;             // max integrator step; 0 -> period/500
  InitMode init = InitMode::steady;
  SwitchedState init_state{};  // used when init == custom
  bool store_samples = true;
  long store_every = 1;        // keep every Nth integrator sample
  bool source_off = false;     // force i_r = 0 (dissipation checks)
  PlantKind plant = PlantKind::wpt;
  double v_in = 0.0;           // voltage_source plant; 0 -> matching dc-link level
};

struct TracePoint {
  double t;
  double v_dc, i_l, v_o;
  double duty;   // duty latched for the containing period
  double i_r;
  int u;         // switch command at this sample
};

/// One row per switching period. t is the period *center*; the averages are
/// trapezoidal over exactly the samples of [nT, (n+1)T].
struct CycleRow {
  long n;
  double t;
  double v_dc, i_l, v_o;
  double duty;
  double on_time;  // accumulated S1 conduction time within the period
};

struct SimTrace {
  std::vector<TracePoint> samples;
  std::vector<CycleRow> cycles;
  SimVerdict verdict = SimVerdict::completed;
  double t_end = 0.0;      // time reached (== requested unless diverged)
  double dt = 0.0;         // resolved max step
  double period = 0.0;
};

/// Switch command: 1 on (nT, (n+d)T], 0 on ((n+d)T, (n+1)T].
int pwm(double t, double d, double period);

/// Rectified secondary current |i_ls_amp * sin(2 pi f t)|.
double rectified_current(double t, double i_ls_amp, double f);

/// Switched-model right-hand side for a given switch state and source current.
SwitchedState state_derivatives(const ReceiverParams& p, const SwitchedState& x,
                                int u, double i_r);

/// Fixed-step RK4 over the switching grid. Integration restarts at every
/// switching event (period start, duty edge, rectifier zero crossing) so no
/// step straddles a discontinuity; steady init applies a 2 ms pre-roll before
/// the scenario clock starts. Divergence (|state| > 1e6 x steady scale) stops
/// the run early with verdict = diverged.
SimTrace run(const ReceiverParams& p, const Scenario& sc);

enum class StateSignal { v_dc, i_l, v_o };

struct UndershootReport {
  bool has_undershoot = false;
  double depth = 0.0;      // initial - minimum, signal units
  double t_min = 0.0;
  double initial = 0.0;    // cycle average just before the step
  double final_value = 0.0;
};

/// Classifies the cycle-averaged response after a duty step as monotonic or
/// non-minimum-phase (initial dip). The dip must exceed 0.1% of the initial
/// level to count; cycle averages are smooth enough that this margin only
/// rejects numerical fuzz.
UndershootReport detect_undershoot(const SimTrace& trace, StateSignal sig,
                                   double t_step);

}  // namespace wptrx
