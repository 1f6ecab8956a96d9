#include "wptrx/switched_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wptrx/avg_model.hpp"

namespace wptrx {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPrerollSeconds = 2e-3;
constexpr double kDutyClampLo = 0.02;
constexpr double kDutyClampHi = 0.98;

}  // namespace

int pwm(double t, double d, double period) {
  if (!(period > 0.0) || !std::isfinite(t))
    throw std::invalid_argument("pwm: bad time/period");
  if (!(d >= 0.0) || d > 1.0)
    throw std::invalid_argument("pwm: duty must lie in [0, 1]");
  double frac = t / period - std::floor(t / period);
  // An exact period boundary is the closing instant of the previous period.
  if (frac == 0.0) frac = 1.0;
  return frac <= d ? 1 : 0;
}

double rectified_current(double t, double i_ls_amp, double f) {
  return std::abs(i_ls_amp * std::sin(2.0 * kPi * f * t));
}

SwitchedState state_derivatives(const ReceiverParams& p, const SwitchedState& x,
                                int u, double i_r) {
  SwitchedState dx;
  dx.v_dc = (i_r - u * x.i_l) / p.c_dc;
  dx.i_l = (u * x.v_dc - x.v_o) / p.l;
  dx.v_o = (x.i_l - x.v_o / p.r) / p.c_o;
  return dx;
}

namespace {

struct Limits {
  double v_dc, i_l, v_o;
};

// Integrates one smooth segment (fixed switch state, fixed sign of the
// source half-wave) and accumulates the trapezoidal cycle integral. The
// rectified source is advanced by phasor rotation at half-step granularity;
// one sin/cos pair per segment instead of two libm calls per step.
struct SegmentIntegrator {
  const ReceiverParams& p;
  PlantKind plant;
  double v_in;
  bool source_off;

  // cycle accumulators
  double acc_vdc = 0.0, acc_il = 0.0, acc_vo = 0.0;

  bool advance(SwitchedState& x, double t0, double frac0, double len, int u,
               double sign, double dt_max) {
    const long n_steps = std::max(1L, static_cast<long>(std::ceil(len / dt_max - 1e-9)));
    const double h = len / static_cast<double>(n_steps);
    const double amp = source_off ? 0.0 : p.i_ls_amp;

    double s = std::sin(2.0 * kPi * frac0);
    double c = std::cos(2.0 * kPi * frac0);
    const double dth = kPi * p.f * h;  // rotation per half step
    const double cd = std::cos(dth), sd = std::sin(dth);

    const double inv_cdc = 1.0 / p.c_dc, inv_l = 1.0 / p.l;
    const double inv_co = 1.0 / p.c_o, inv_r = 1.0 / p.r;
    const bool vs = plant == PlantKind::voltage_source;

    for (long k = 0; k < n_steps; ++k) {
      const double ir0 = std::max(0.0, amp * sign * s);
      double s1 = s * cd + c * sd, c1 = c * cd - s * sd;
      const double ir_m = std::max(0.0, amp * sign * s1);
      double s2 = s1 * cd + c1 * sd, c2 = c1 * cd - s1 * sd;
      const double ir_e = std::max(0.0, amp * sign * s2);
      s = s2;
      c = c2;

      auto deriv = [&](const SwitchedState& y, double ir, SwitchedState& dy) {
        if (vs) {
          dy.v_dc = 0.0;
          dy.i_l = (u * v_in - y.v_o) * inv_l;
        } else {
          dy.v_dc = (ir - u * y.i_l) * inv_cdc;
          dy.i_l = (u * y.v_dc - y.v_o) * inv_l;
        }
        dy.v_o = (y.i_l - y.v_o * inv_r) * inv_co;
      };

      SwitchedState k1, k2, k3, k4, tmp;
      deriv(x, ir0, k1);
      tmp = {x.v_dc + 0.5 * h * k1.v_dc, x.i_l + 0.5 * h * k1.i_l,
             x.v_o + 0.5 * h * k1.v_o};
      deriv(tmp, ir_m, k2);
      tmp = {x.v_dc + 0.5 * h * k2.v_dc, x.i_l + 0.5 * h * k2.i_l,
             x.v_o + 0.5 * h * k2.v_o};
      deriv(tmp, ir_m, k3);
      tmp = {x.v_dc + h * k3.v_dc, x.i_l + h * k3.i_l, x.v_o + h * k3.v_o};
      deriv(tmp, ir_e, k4);

      SwitchedState next{
          x.v_dc + h / 6.0 * (k1.v_dc + 2.0 * (k2.v_dc + k3.v_dc) + k4.v_dc),
          x.i_l + h / 6.0 * (k1.i_l + 2.0 * (k2.i_l + k3.i_l) + k4.i_l),
          x.v_o + h / 6.0 * (k1.v_o + 2.0 * (k2.v_o + k3.v_o) + k4.v_o)};

      acc_vdc += 0.5 * h * (x.v_dc + next.v_dc);
      acc_il += 0.5 * h * (x.i_l + next.i_l);
      acc_vo += 0.5 * h * (x.v_o + next.v_o);
      x = next;

      if (on_step) {
        if (!on_step(t0 + (k + 1) * h, x, ir_e, u)) return false;
      }
    }
    return true;
  }

  // called after each accepted step with (t, state, i_r, u); false aborts
  std::function<bool(double, const SwitchedState&, double, int)> on_step;
};

double clamp_duty(double d) {
  return std::clamp(d, kDutyClampLo, kDutyClampHi);
}

}  // namespace

SimTrace run(const ReceiverParams& p, const Scenario& sc) {
  validate(p);
  const double T = p.period();
  const double dt = sc.dt > 0.0 ? sc.dt : T / 500.0;
  if (dt > T / 200.0 + 1e-18)
    throw std::invalid_argument("run: dt must not exceed period/200");
  if (!(sc.duration > 0.0))
    throw std::invalid_argument("run: duration must be positive");
  if (sc.store_every < 1)
    throw std::invalid_argument("run: store_every must be >= 1");

  auto duty_ok = [](double d) {
    if (!std::isfinite(d) || d <= 0.0 || d >= 1.0)
      throw std::invalid_argument("run: duty program leaves (0, 1)");
  };
  duty_ok(sc.d0);
  if (sc.mode == DutyMode::step) duty_ok(sc.d_after);
  if (sc.mode == DutyMode::sine) {
    const double head = std::min(sc.d0, 1.0 - sc.d0);
    if (!(sc.sine_amp > 0.0) || sc.sine_amp > 0.25 * head)
      throw std::invalid_argument(
          "run: sine amplitude must be positive and small against the duty headroom");
    if (!(sc.sine_freq > 0.0))
      throw std::invalid_argument("run: sine frequency must be positive");
  }
  if (sc.mode == DutyMode::controller && !sc.controller)
    throw std::invalid_argument("run: controller scenario without callback");

  const bool vs = sc.plant == PlantKind::voltage_source;
  double v_in = sc.v_in;
  if (vs && v_in <= 0.0) v_in = steady_state_at(p, sc.d0).v_dc;

  SwitchedState x;
  switch (sc.init) {
    case InitMode::steady:
      if (vs) {
        x = {v_in, sc.d0 * v_in / p.r, sc.d0 * v_in};
      } else {
        OperatingPoint op = steady_state_at(p, sc.d0);
        x = {op.v_dc, op.i_l, op.v_o};
      }
      break;
    case InitMode::zero:
      x = {vs ? v_in : 0.0, 0.0, 0.0};
      break;
    case InitMode::custom:
      x = sc.init_state;
      break;
  }

  // Divergence guard scaled off the nominal operating point.
  OperatingPoint scale_op = vs ? OperatingPoint{v_in, v_in / p.r, v_in, sc.d0}
                               : steady_state_at(p, sc.d0);
  const Limits lim{1e6 * std::max(1.0, std::abs(scale_op.v_dc)),
                   1e6 * std::max(1.0, std::abs(scale_op.i_l)),
                   1e6 * std::max(1.0, std::abs(scale_op.v_o))};

  SimTrace trace;
  trace.dt = dt;
  trace.period = T;

  SegmentIntegrator seg{p, sc.plant, v_in, sc.source_off, 0.0, 0.0, 0.0, {}};

  bool diverged = false;
  double t_div = 0.0;
  auto guard = [&](double t, const SwitchedState& y) {
    if (!std::isfinite(y.v_dc) || !std::isfinite(y.i_l) ||
        !std::isfinite(y.v_o) || std::abs(y.v_dc) > lim.v_dc ||
        std::abs(y.i_l) > lim.i_l || std::abs(y.v_o) > lim.v_o) {
      diverged = true;
      t_div = t;
      return false;
    }
    return true;
  };

  auto run_period = [&](double t_base, double d_n) {
    // Events inside one period: duty edge and the rectifier zero crossing.
    double fr[4] = {0.0, std::min(d_n, 0.5), std::max(d_n, 0.5), 1.0};
    bool ok = true;
    for (int i = 0; i < 3 && ok; ++i) {
      const double f0 = fr[i], f1 = fr[i + 1];
      if (f1 - f0 < 1e-15) continue;
      const double mid = 0.5 * (f0 + f1);
      const int u = mid < d_n ? 1 : 0;
      const double sign = mid < 0.5 ? 1.0 : -1.0;
      ok = seg.advance(x, t_base + f0 * T, f0, (f1 - f0) * T, u, sign, dt);
    }
    return ok;
  };

  // Settling pre-roll ahead of the scenario clock.
  if (sc.init == InitMode::steady) {
    seg.on_step = [&](double t, const SwitchedState& y, double, int) {
      return guard(t, y);
    };
    const long n_pre = std::lround(kPrerollSeconds / T);
    for (long n = 0; n < n_pre && !diverged; ++n)
      run_period((n - n_pre) * T, sc.d0);
  }

  const long n_periods =
      static_cast<long>(std::ceil(sc.duration / T - 1e-9));
  long sample_idx = 0;

  if (sc.store_samples) {
    const long est = n_periods * 500 / std::max(1L, sc.store_every) + 2;
    trace.samples.reserve(std::min(est, 80'000'000L / 56));
  }
  trace.cycles.reserve(n_periods);

  double cur_duty = sc.d0;
  int cur_u = 0;
  seg.on_step = [&](double t, const SwitchedState& y, double ir, int u) {
    cur_u = u;
    if (!guard(t, y)) return false;
    if (sc.store_samples && (++sample_idx % sc.store_every == 0))
      trace.samples.push_back({t, y.v_dc, y.i_l, y.v_o, cur_duty, ir, u});
    return true;
  };

  for (long n = 0; n < n_periods && !diverged; ++n) {
    const double t_base = n * T;
    double d_n = sc.d0;
    switch (sc.mode) {
      case DutyMode::constant:
        break;
      case DutyMode::step:
        if (t_base >= sc.step_time - 1e-15) d_n = sc.d_after;
        break;
      case DutyMode::sine:
        d_n = sc.d0 + sc.sine_amp * std::sin(2.0 * kPi * sc.sine_freq * t_base);
        break;
      case DutyMode::controller:
        d_n = clamp_duty(sc.controller(n, t_base, x));
        break;
    }
    duty_ok(d_n);
    cur_duty = d_n;

    if (n == 0 && sc.store_samples)
      trace.samples.push_back({0.0, x.v_dc, x.i_l, x.v_o, d_n, 0.0, 0});

    seg.acc_vdc = seg.acc_il = seg.acc_vo = 0.0;
    const bool ok = run_period(t_base, d_n);
    if (ok) {
      trace.cycles.push_back({n, (n + 0.5) * T, seg.acc_vdc / T,
                              seg.acc_il / T, seg.acc_vo / T, d_n, d_n * T});
      trace.t_end = (n + 1) * T;
    }
  }

  if (diverged) {
    trace.verdict = SimVerdict::diverged;
    trace.t_end = std::max(t_div, 0.0);
  }
  return trace;
}

UndershootReport detect_undershoot(const SimTrace& trace, StateSignal sig,
                                   double t_step) {
  const auto& rows = trace.cycles;
  if (rows.size() < 8)
    throw std::invalid_argument("detect_undershoot: trace too short");
  auto value = [&](const CycleRow& r) {
    switch (sig) {
      case StateSignal::v_dc: return r.v_dc;
      case StateSignal::i_l: return r.i_l;
      default: return r.v_o;
    }
  };
  std::size_t idx0 = rows.size();
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].t > t_step) {
      idx0 = i;
      break;
    }
  if (idx0 == rows.size() || idx0 < 1)
    throw std::invalid_argument("detect_undershoot: step time outside trace");

  UndershootReport rep;
  rep.initial = value(rows[idx0 - 1]);
  double mn = rep.initial;
  double t_mn = rows[idx0 - 1].t;
  for (std::size_t i = idx0; i < rows.size(); ++i) {
    const double v = value(rows[i]);
    if (v < mn) {
      mn = v;
      t_mn = rows[i].t;
    }
  }
  double fin = 0.0;
  const std::size_t tail = std::min<std::size_t>(5, rows.size() - idx0);
  for (std::size_t i = rows.size() - tail; i < rows.size(); ++i)
    fin += value(rows[i]);
  rep.final_value = fin / static_cast<double>(tail);
  rep.depth = rep.initial - mn;
  rep.t_min = t_mn;
  rep.has_undershoot = rep.depth > 1e-3 * std::max(std::abs(rep.initial), 1e-12);
  return rep;
}

}  // namespace wptrx
