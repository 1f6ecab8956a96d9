#include "wptrx/control_design.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wptrx/avg_model.hpp"

namespace wptrx {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_deg(double a) {
  a = std::fmod(a, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

std::size_t lowest_nonzero(const Polynomial& p) {
  const auto& c = p.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] != 0.0) return i;
  return c.size();
}

}  // namespace

RationalTF pi_tf(const CompensatorPI& c) {
  if (!(c.kp > 0.0) || !(c.ki >= 0.0))
    throw std::invalid_argument("pi_tf: kp must be positive and ki non-negative");
  return {Polynomial{c.ki, c.kp}, Polynomial{0.0, 1.0}, "pi"};
}

RationalTF single_loop_gain(const CompensatorPI& c, const RationalTF& plant) {
  RationalTF g = pi_tf(c);
  return {g.num * plant.num, g.den * plant.den, "single_loop"};
}

RationalTF inner_loop_gain(const ReceiverParams& p, double k_ivdc) {
  if (!(k_ivdc > 0.0))
    throw std::invalid_argument("inner_loop_gain: k_ivdc must be positive");
  RationalTF g = tf_vdc(p);
  return {-k_ivdc * g.num, g.den, "inner_loop"};
}

double design_k_ivdc(const ReceiverParams& p) {
  validate(p);
  const std::complex<double> s(0.0, 2.0 * kPi * p.f / 10.0);
  return 1.0 / std::abs(eval_tf(tf_vdc(p), s));
}

RationalTF outer_loop_gain(const ReceiverParams& p, double k_ivdc,
                           const CompensatorPI& c) {
  if (!(k_ivdc > 0.0))
    throw std::invalid_argument("outer_loop_gain: k_ivdc must be positive");
  RationalTF g_vdc = tf_vdc(p);
  RationalTF g_vo = tf_vo(p);
  RationalTF pi = pi_tf(c);
  // G_c * k G_vo / (k G_vdc - 1) over the shared plant denominator.
  Polynomial num = pi.num * (k_ivdc * g_vo.num);
  Polynomial den = pi.den * (k_ivdc * g_vdc.num - g_vdc.den);
  return {num, den, "outer_loop"};
}

double kp_bound(const ReceiverParams& p) {
  validate(p);
  return p.d_nom * (p.c_o * p.r * p.r + p.l) / (p.c_dc * p.r * p.r);
}

DualLoopDesign design_dual_loop(const ReceiverParams& p) {
  DualLoopDesign d;
  d.k_ivdc = design_k_ivdc(p);
  d.kp_limit = kp_bound(p);
  d.pi.kp = 0.5 < 0.8 * d.kp_limit ? 0.5 : 0.72 * d.kp_limit;
  d.pi.ki = 0.01 * kPi * p.f * d.pi.kp;
  return d;
}

StabilityMargins margins(const RationalTF& loop, double f_lo, double f_hi,
                         int points_per_decade) {
  if (!(f_lo > 0.0) || !(f_hi > f_lo))
    throw std::invalid_argument("margins: need 0 < f_lo < f_hi");
  if (points_per_decade < 8)
    throw std::invalid_argument("margins: grid too coarse");
  if (loop.num.is_zero() || loop.den.is_zero())
    throw std::invalid_argument("margins: degenerate loop gain");

  const std::size_t tz_n = lowest_nonzero(loop.num);
  const std::size_t tz_d = lowest_nonzero(loop.den);
  // Anchor at -90 deg per net integrator; the overall loop sign is dropped
  // so the reported numbers follow the usual design-chart convention.
  Polynomial num = loop.num;
  if (loop.num.coeffs()[tz_n] / loop.den.coeffs()[tz_d] < 0.0) num *= -1.0;
  const double anchor =
      -90.0 * (static_cast<double>(tz_d) - static_cast<double>(tz_n));

  auto raw = [&](double f) {
    const std::complex<double> s(0.0, 2.0 * kPi * f);
    const std::complex<double> h = num.eval(s) / loop.den.eval(s);
    const double m = std::max(std::abs(h), 1e-300);
    return std::pair<double, double>(20.0 * std::log10(m),
                                     std::arg(h) * 180.0 / kPi);
  };

  const int n_pts = static_cast<int>(
                        std::ceil(std::log10(f_hi / f_lo) * points_per_decade)) +
                    1;
  std::vector<double> fs(n_pts), mag(n_pts), ph(n_pts), arg(n_pts);
  const double lr = std::log(f_hi / f_lo);
  for (int i = 0; i < n_pts; ++i) {
    fs[i] = f_lo * std::exp(lr * i / (n_pts - 1));
    auto [m, a] = raw(fs[i]);
    mag[i] = m;
    arg[i] = a;
    if (i == 0) {
      ph[0] = anchor + wrap_deg(a - anchor);
    } else {
      const double d = wrap_deg(a - arg[i - 1]);
      if (std::abs(d) > 120.0)
        throw std::runtime_error("margins: frequency grid too coarse to unwrap");
      ph[i] = ph[i - 1] + d;
    }
  }

  // Unwrapped phase at an arbitrary frequency inside grid cell i.
  auto phase_at = [&](double f, int i) {
    return ph[i] + wrap_deg(raw(f).second - arg[i]);
  };

  StabilityMargins out;
  for (int i = 0; i + 1 < n_pts && !out.has_crossover; ++i) {
    if (mag[i] == 0.0 || mag[i] * mag[i + 1] < 0.0) {
      double a = fs[i], b = fs[i + 1];
      for (int it = 0; it < 80; ++it) {
        const double m = std::sqrt(a * b);
        (raw(m).first > 0.0) == (mag[i] > 0.0) ? a = m : b = m;
      }
      const double fc = std::sqrt(a * b);
      out.has_crossover = true;
      out.crossover_hz = fc;
      out.phase_margin_deg = 180.0 + phase_at(fc, i);
    }
  }
  for (int i = 0; i + 1 < n_pts && !out.has_gain_margin; ++i) {
    const double e0 = ph[i] + 180.0, e1 = ph[i + 1] + 180.0;
    if (e0 == 0.0 || e0 * e1 < 0.0) {
      double a = fs[i], b = fs[i + 1];
      for (int it = 0; it < 80; ++it) {
        const double m = std::sqrt(a * b);
        ((phase_at(m, i) + 180.0) > 0.0) == (e0 > 0.0) ? a = m : b = m;
      }
      const double f180 = std::sqrt(a * b);
      out.has_gain_margin = true;
      out.phase_cross_hz = f180;
      out.gain_margin_db = -raw(f180).first;
    }
  }
  return out;
}

CharacteristicStability characteristic_stability(const RationalTF& loop) {
  Polynomial ch = loop.num + loop.den;
  CharacteristicStability out;
  out.roots = poly_roots(ch);
  double scale = 1.0;
  for (const auto& r : out.roots) scale = std::max(scale, std::abs(r));
  for (const auto& r : out.roots)
    if (r.real() > -1e-9 * scale) ++out.rhp_count;
  out.stable = out.rhp_count == 0;
  return out;
}

ClosedLoopResult closed_loop_sim(const ReceiverParams& p,
                                 const ControllerSpec& ctrl,
                                 const ClosedLoopScenario& sc) {
  validate(p);
  if (!(ctrl.pi.kp > 0.0) || !(ctrl.pi.ki > 0.0))
    throw std::invalid_argument("closed_loop_sim: PI gains must be positive");
  if (!(sc.duration > 0.0))
    throw std::invalid_argument("closed_loop_sim: duration must be positive");
  if (sc.event == ClEvent::gain_step && !(sc.kp_after > 0.0))
    throw std::invalid_argument("closed_loop_sim: stepped kp must be positive");
  if (sc.event == ClEvent::reference_step && !(sc.ref_scale > 0.0))
    throw std::invalid_argument("closed_loop_sim: reference scale must be positive");

  const bool vs = ctrl.plant == PlantKind::voltage_source;
  const double T = p.period();
  double v_in = 0.0;
  double v_ref = ctrl.v_ref;
  if (vs) {
    v_in = steady_state_at(p, p.d_nom).v_dc;
    if (v_ref <= 0.0) v_ref = p.d_nom * v_in;
  } else if (v_ref <= 0.0) {
    v_ref = steady_state(p).v_o;
  }
  const double k_ivdc =
      ctrl.k_ivdc > 0.0 ? ctrl.k_ivdc : design_k_ivdc(p);

  struct PiState {
    bool started = false;
    double integ = 0.0;
    double e_prev = 0.0;
    double kp = 0.0;
    double ki = 0.0;
    double ref = 0.0;
    bool event_done = false;
  };
  auto st = std::make_shared<PiState>();
  st->kp = ctrl.pi.kp;
  st->ki = ctrl.pi.ki;
  st->ref = v_ref;

  const ControllerKind kind = ctrl.kind;
  const ClEvent event = sc.event;
  const double event_time = sc.event_time;
  const double kp_after = sc.kp_after;
  const double ref_scale = sc.ref_scale;
  const double d_nom = p.d_nom;
  const double kp0 = ctrl.pi.kp;

  Scenario sim;
  sim.mode = DutyMode::controller;
  sim.d0 = p.d_nom;
  sim.duration = sc.duration;
  sim.dt = sc.dt;
  sim.init = InitMode::steady;
  sim.store_samples = sc.store_samples;
  sim.store_every = sc.store_every;
  sim.plant = ctrl.plant;
  sim.controller = [st, kind, event, event_time, kp_after, ref_scale, d_nom,
                    kp0, k_ivdc, vs, T](long, double t, const SwitchedState& x) {
    if (event != ClEvent::none && !st->event_done && t >= event_time - 1e-15) {
      if (event == ClEvent::gain_step)
        st->kp = kp_after;
      else
        st->ref *= ref_scale;
      st->event_done = true;
    }
    // Loop error: the duty-to-output dc gain of the wpt plant is negative,
    // so the stand-alone PI regulates on (v_o - ref) there; everything else
    // uses the usual (ref - v_o).
    const double e = (kind == ControllerKind::single_pi && !vs)
                         ? x.v_o - st->ref
                         : st->ref - x.v_o;
    if (!st->started) {
      // Bumpless start: preload the integrator so the first command is the
      // nominal duty for the state actually observed.
      if (kind == ControllerKind::dual_loop)
        st->integ = (x.v_dc - d_nom / k_ivdc) - kp0 * e;
      else
        st->integ = d_nom - kp0 * e;
      st->e_prev = e;
      st->started = true;
    }
    const double integ_next = st->integ + st->ki * T * 0.5 * (e + st->e_prev);
    st->e_prev = e;

    auto command = [&](double integ) {
      const double u_pi = st->kp * e + integ;
      return kind == ControllerKind::dual_loop ? k_ivdc * (x.v_dc - u_pi)
                                               : u_pi;
    };
    double d = command(integ_next);
    if (d >= 0.02 && d <= 0.98) {
      st->integ = integ_next;  // commit only while the actuator is unclamped
    } else {
      d = command(st->integ);
    }
    return std::clamp(d, 0.02, 0.98);
  };

  ClosedLoopResult out;
  out.trace = run(p, sim);
  out.verdict = out.trace.verdict;

  const double ref_final = st->ref;
  const double t_settle = std::max(sc.duration - 5e-3, 0.75 * sc.duration);
  double worst = 0.0;
  for (const CycleRow& r : out.trace.cycles)
    if (r.t >= t_settle)
      worst = std::max(worst, std::abs(r.v_o - ref_final));
  out.max_err_after_settle = worst;
  if (out.verdict == SimVerdict::completed &&
      worst > 0.02 * std::abs(ref_final))
    out.verdict = SimVerdict::diverged;
  return out;
}

}  // namespace wptrx
