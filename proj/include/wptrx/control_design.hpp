#pragma once

#include <complex>
#include <vector>

#include "wptrx/switched_sim.hpp"
#include "wptrx/transfer_function.hpp"

namespace wptrx {

struct CompensatorPI {
  double kp = 0.0;
  double ki = 0.0;
};

/// G_c(s) = kp (s + ki/kp) / s = kp + ki/s.
RationalTF pi_tf(const CompensatorPI& c);

/// Plain product G_c(s) * plant(s) for single-loop studies.
RationalTF single_loop_gain(const CompensatorPI& c, const RationalTF& plant);

/// Inner-loop gain k_ivdc applied to the dc-link TF with the feedback sign
/// folded in: LG_i(s) = -k_ivdc * G_vdc(s).
RationalTF inner_loop_gain(const ReceiverParams& p, double k_ivdc);

/// Places the inner crossover at a tenth of the switching frequency:
/// k_ivdc = 1 / |G_vdc(j 0.2 pi f)|.
double design_k_ivdc(const ReceiverParams& p);

/// Outer voltage-loop gain with the inner loop closed:
/// LG_o(s) = G_c(s) * k_ivdc G_vo(s) / (k_ivdc G_vdc(s) - 1).
RationalTF outer_loop_gain(const ReceiverParams& p, double k_ivdc,
                           const CompensatorPI& c);

/// Proportional-gain ceiling d_nom (c_o r^2 + l) / (c_dc r^2) for the outer
/// loop; the closed-loop characteristic goes unstable just below this value.
double kp_bound(const ReceiverParams& p);

struct DualLoopDesign {
  double k_ivdc = 0.0;
  CompensatorPI pi;
  double kp_limit = 0.0;
};

/// Full dual-loop recipe: k_ivdc from the crossover rule, kp = 0.5 (falling
/// back to 0.72x the ceiling when 0.5 is not safely below it), and the
/// integral gain tied to the switching frequency, ki = 0.01 pi f kp.
DualLoopDesign design_dual_loop(const ReceiverParams& p);

struct StabilityMargins {
  bool has_crossover = false;
  double crossover_hz = 0.0;
  double phase_margin_deg = 0.0;
  bool has_gain_margin = false;
  double phase_cross_hz = 0.0;
  double gain_margin_db = 0.0;
};

/// Crossover/PM/GM on a log grid with bisection refinement. The unwrapped
/// phase is anchored at -90 deg per integrator and measured relative to the
/// low-frequency phase (the overall loop sign is dropped), so a loop quoted
/// "as written" with a negative dc gain reports the conventional margin
/// numbers. PM = 180 deg + phase at the first unity crossing; GM from the
/// first -180 deg phase crossing, absent if the phase never gets there.
StabilityMargins margins(const RationalTF& loop, double f_lo, double f_hi,
                         int points_per_decade = 192);

struct CharacteristicStability {
  bool stable = false;
  int rhp_count = 0;
  std::vector<std::complex<double>> roots;
};

/// Roots of num + den of the loop gain (unity negative feedback). Roots on
/// the axis count as unstable.
CharacteristicStability characteristic_stability(const RationalTF& loop);

enum class ControllerKind { single_pi, dual_loop };
enum class ClEvent { none, gain_step, reference_step };

struct ControllerSpec {
  ControllerKind kind = ControllerKind::dual_loop;
  CompensatorPI pi{0.5, 3141.592653589793};
  double k_ivdc = 0.0;   // 0 -> design_k_ivdc
  double v_ref = 0.0;    // 0 -> steady-state output voltage
  PlantKind plant = PlantKind::wpt;  // single_pi may drive either plant
};

struct ClosedLoopScenario {
  double duration = 30e-3;
  ClEvent event = ClEvent::none;
  double event_time = 10e-3;
  double kp_after = 0.1;    // gain_step
  double ref_scale = 1.05;  // reference_step multiplier
  double dt = 0.0;
  bool store_samples = true;
  long store_every = 1;
};

struct ClosedLoopResult {
  SimTrace trace;
  SimVerdict verdict = SimVerdict::completed;
  double max_err_after_settle = 0.0;  // max |v_o - ref| over the last 5 ms
};

/// Switched-model closed loop with the once-per-period sampled controller
/// (trapezoidal integrator, clamped-integral anti-windup, bumpless start at
/// the nominal duty). Verdict: diverged if the state guard trips or the
/// cycle-averaged |v_o - ref| stays above 2% of the reference over the final
/// 5 ms. The duty clamp bounds any unstable limit cycle, so the settling
/// test, not the magnitude guard, is what catches loop instability.
ClosedLoopResult closed_loop_sim(const ReceiverParams& p,
                                 const ControllerSpec& ctrl,
                                 const ClosedLoopScenario& sc);

}  // namespace wptrx
