#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wptrx/avg_model.hpp"
#include "wptrx/switched_sim.hpp"

using namespace wptrx;

namespace {

constexpr double kPi = 3.14159265358979323846;

double cycle_avg_err(const SimTrace& tr, const OperatingPoint& op,
                     double t_from) {
  double worst = 0.0;
  for (const auto& c : tr.cycles) {
    if (c.t < t_from) continue;
    worst = std::max({worst, std::abs(c.v_dc - op.v_dc) / op.v_dc,
                      std::abs(c.i_l - op.i_l) / op.i_l,
                      std::abs(c.v_o - op.v_o) / op.v_o});
  }
  return worst;
}

}  // namespace

TEST_CASE("switch command conventions") {
  const double T = 5e-6;
  // interval is open at the period start and closed at the duty edge
  CHECK(pwm(0.0, 0.5, T) == 0);
  CHECK(pwm(1e-9, 0.5, T) == 1);
  CHECK(pwm(0.5 * T, 0.5, T) == 1);
  CHECK(pwm(0.5 * T + 1e-12, 0.5, T) == 0);
  CHECK(pwm(0.999 * T, 0.5, T) == 0);
  CHECK(pwm(T + 1e-9, 0.5, T) == 1);  // next period
  CHECK(pwm(0.3 * T, 0.0, T) == 0);
  CHECK(pwm(0.3 * T, 1.0, T) == 1);
  CHECK(pwm(0.0, 1.0, T) == 1);
  CHECK_THROWS_AS(pwm(0.0, -0.1, T), std::invalid_argument);
  CHECK_THROWS_AS(pwm(0.0, 1.1, T), std::invalid_argument);
  CHECK_THROWS_AS(pwm(0.0, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("rectified source current") {
  const double f = 200e3;
  CHECK(rectified_current(0.0, 1.0, f) == 0.0);
  CHECK(rectified_current(1.25e-6, 1.0, f) == Catch::Approx(1.0));  // quarter period
  CHECK(rectified_current(3.75e-6, 1.0, f) == Catch::Approx(1.0));  // |sin| both halves
  CHECK(rectified_current(1.25e-6, 2.5, f) == Catch::Approx(2.5));
  // mean over one period is 2 A / pi
  const int n = 40000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    acc += rectified_current((i + 0.5) / (f * n), 1.0, f);
  CHECK(acc / n == Catch::Approx(2.0 / kPi).epsilon(1e-6));
}

TEST_CASE("switched right-hand side") {
  const ReceiverParams p;
  const SwitchedState x{10.0, 2.0, 5.0};
  const SwitchedState on = state_derivatives(p, x, 1, 0.8);
  CHECK(on.v_dc == Catch::Approx((0.8 - 2.0) / p.c_dc));
  CHECK(on.i_l == Catch::Approx((10.0 - 5.0) / p.l));
  CHECK(on.v_o == Catch::Approx((2.0 - 5.0 / p.r) / p.c_o));
  const SwitchedState off = state_derivatives(p, x, 0, 0.8);
  CHECK(off.v_dc == Catch::Approx(0.8 / p.c_dc));
  CHECK(off.i_l == Catch::Approx((0.0 - 5.0) / p.l));
  CHECK(off.v_o == on.v_o);
}

TEST_CASE("constant duty holds the averaged equilibrium") {
  const ReceiverParams p;
  Scenario sc;
  sc.mode = DutyMode::constant;
  sc.duration = 8e-3;
  sc.store_samples = false;
  const SimTrace tr = run(p, sc);
  REQUIRE(tr.verdict == SimVerdict::completed);
  REQUIRE(tr.cycles.size() == 1600);
  const OperatingPoint op = steady_state(p);
  CHECK(cycle_avg_err(tr, op, 5e-3) < 0.005);
  // dc-link never swings negative and the switched trace stays bounded
  for (const auto& c : tr.cycles) {
    CHECK(c.v_dc > 0.0);
    CHECK(c.duty == 0.5);
    CHECK(c.on_time == Catch::Approx(0.5 * tr.period));
  }
  CHECK(tr.t_end == Catch::Approx(8e-3));
  CHECK(tr.dt == Catch::Approx(tr.period / 500.0));
}

TEST_CASE("duty edges land exactly on the commanded fraction") {
  ReceiverParams p;
  Scenario sc;
  sc.mode = DutyMode::constant;
  sc.d0 = 0.3;
  sc.duration = 10.0 / p.f;  // ten periods
  sc.store_every = 1;
  const SimTrace tr = run(p, sc);
  REQUIRE(tr.verdict == SimVerdict::completed);
  // reconstruct per-period on-time from the stored switch commands: the
  // simulator schedules segment boundaries at the duty fraction, so the
  // accumulated sum of u * (t_i - t_{i-1}) must equal d*T to rounding
  const double T = tr.period;
  std::vector<double> on_time(10, 0.0);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    const auto& a = tr.samples[i - 1];
    const auto& b = tr.samples[i];
    const int n = std::min<int>(9, static_cast<int>(a.t / T + 0.5 * tr.dt / T));
    if (b.u == 1) on_time[static_cast<std::size_t>(n)] += b.t - a.t;
  }
  for (int n = 0; n < 10; ++n)
    CHECK(std::abs(on_time[static_cast<std::size_t>(n)] - 0.3 * T) < 1e-12 * T);
  // the per-period ledger agrees
  for (const auto& c : tr.cycles)
    CHECK(c.on_time == Catch::Approx(0.3 * T).margin(1e-12 * T));
}

TEST_CASE("duty step shows the non-minimum-phase dip") {
  const ReceiverParams p;
  Scenario sc;
  sc.mode = DutyMode::step;
  sc.d0 = 0.5;
  sc.d_after = 0.475;
  sc.step_time = 5e-3;
  sc.duration = 20e-3;
  sc.store_samples = false;
  const SimTrace tr = run(p, sc);
  REQUIRE(tr.verdict == SimVerdict::completed);

  const UndershootReport vo = detect_undershoot(tr, StateSignal::v_o, 5e-3);
  CHECK(vo.has_undershoot);
  CHECK(vo.depth > 0.4);
  CHECK(vo.depth < 0.65);
  CHECK(vo.t_min - 5e-3 < 1e-3);
  CHECK(vo.t_min > 5e-3);
  CHECK(vo.final_value > vo.initial);  // recovers above the old level

  const UndershootReport il = detect_undershoot(tr, StateSignal::i_l, 5e-3);
  CHECK(il.has_undershoot);
  CHECK(il.depth > 0.2);
  CHECK(il.depth < 0.35);

  // the dc-link just walks up monotonically (cycle averages)
  const UndershootReport vdc = detect_undershoot(tr, StateSignal::v_dc, 5e-3);
  CHECK_FALSE(vdc.has_undershoot);
  CHECK(vdc.final_value - vdc.initial == Catch::Approx(1.9258).margin(0.04));
}

TEST_CASE("cycle averages track the averaged model under slow modulation") {
  const ReceiverParams p;
  Scenario sc;
  sc.mode = DutyMode::sine;
  sc.d0 = 0.5;
  sc.sine_amp = 0.02;
  sc.sine_freq = 200.0;
  sc.duration = 10e-3;
  sc.store_samples = false;
  const SimTrace tr = run(p, sc);
  REQUIRE(tr.verdict == SimVerdict::completed);

  // integrate the averaged model with the same per-period duty latch (RK4)
  const OperatingPoint op = steady_state(p);
  AvgState x{op.v_dc, op.i_l, op.v_o};
  const double T = tr.period;
  const int sub = 20;
  const double h = T / sub;
  auto rk4 = [&](const AvgState& y, double d) {
    auto f = [&](const AvgState& z) { return averaged_derivatives(p, z, d); };
    const AvgState k1 = f(y);
    const AvgState k2 = f({y.v_dc + 0.5 * h * k1.v_dc, y.i_l + 0.5 * h * k1.i_l,
                           y.v_o + 0.5 * h * k1.v_o});
    const AvgState k3 = f({y.v_dc + 0.5 * h * k2.v_dc, y.i_l + 0.5 * h * k2.i_l,
                           y.v_o + 0.5 * h * k2.v_o});
    const AvgState k4 =
        f({y.v_dc + h * k3.v_dc, y.i_l + h * k3.i_l, y.v_o + h * k3.v_o});
    return AvgState{
        y.v_dc + h / 6.0 * (k1.v_dc + 2.0 * k2.v_dc + 2.0 * k3.v_dc + k4.v_dc),
        y.i_l + h / 6.0 * (k1.i_l + 2.0 * k2.i_l + 2.0 * k3.i_l + k4.i_l),
        y.v_o + h / 6.0 * (k1.v_o + 2.0 * k2.v_o + 2.0 * k3.v_o + k4.v_o)};
  };
  double max_dev = 0.0;
  for (const auto& c : tr.cycles) {
    const double d = 0.5 + 0.02 * std::sin(2.0 * kPi * 200.0 *
                                           static_cast<double>(c.n) * T);
    CHECK(c.duty == Catch::Approx(d).margin(1e-12));
    // advance the averaged model across this period, then compare midpoints
    AvgState mid = x;
    for (int k = 0; k < sub / 2; ++k) mid = rk4(mid, d);
    max_dev = std::max(max_dev, std::abs(mid.v_o - c.v_o));
    for (int k = 0; k < sub / 2; ++k) mid = rk4(mid, d);
    x = mid;
  }
  CHECK(max_dev < 0.02 * op.v_o);
}

TEST_CASE("stored energy cannot grow with the source disconnected") {
  const ReceiverParams p;
  Scenario sc;
  sc.mode = DutyMode::constant;
  sc.d0 = 0.4;
  sc.source_off = true;
  sc.init = InitMode::custom;
  sc.init_state = {12.0, 1.0, 6.0};
  sc.duration = 2e-3;
  sc.store_every = 10;
  const SimTrace tr = run(p, sc);
  REQUIRE(tr.verdict == SimVerdict::completed);
  double prev = 1e300;
  for (const auto& s : tr.samples) {
    const double e = 0.5 * (p.c_dc * s.v_dc * s.v_dc + p.l * s.i_l * s.i_l +
                            p.c_o * s.v_o * s.v_o);
    CHECK(e <= prev * (1.0 + 1e-12));
    CHECK(s.i_r == 0.0);
    prev = e;
  }
  // everything decays toward zero through the load
  CHECK(prev < 0.1 * 0.5 * (p.c_dc * 144.0 + p.l + p.c_o * 36.0));
}

TEST_CASE("startup from a discharged converter settles to the equilibrium") {
  const ReceiverParams p;
  Scenario sc;
  sc.mode = DutyMode::constant;
  sc.init = InitMode::zero;
  sc.duration = 15e-3;
  sc.store_samples = false;
  const SimTrace tr = run(p, sc);
  REQUIRE(tr.verdict == SimVerdict::completed);
  const OperatingPoint op = steady_state(p);
  CHECK(cycle_avg_err(tr, op, 12e-3) < 0.01);
  for (const auto& c : tr.cycles) CHECK(c.v_dc > -1e-9);
}

TEST_CASE("runaway state is reported, not integrated forever") {
  const ReceiverParams p;
  Scenario sc;
  sc.mode = DutyMode::constant;
  sc.init = InitMode::custom;
  sc.init_state = {1e9, 1e9, 1e9};
  sc.duration = 5e-3;
  sc.store_samples = false;
  const SimTrace tr = run(p, sc);
  CHECK(tr.verdict == SimVerdict::diverged);
  CHECK(tr.t_end < 5e-3);
}

TEST_CASE("input validation") {
  const ReceiverParams p;
  Scenario sc;
  sc.dt = 1.0 / p.f / 100.0;  // coarser than period/200
  CHECK_THROWS_AS(run(p, sc), std::invalid_argument);
  sc = Scenario{};
  sc.d0 = 1.2;
  CHECK_THROWS_AS(run(p, sc), std::invalid_argument);
  sc = Scenario{};
  sc.mode = DutyMode::sine;
  sc.sine_amp = 0.6;  // would leave the duty range
  CHECK_THROWS_AS(run(p, sc), std::invalid_argument);
  sc = Scenario{};
  sc.mode = DutyMode::controller;  // no callback installed
  CHECK_THROWS_AS(run(p, sc), std::invalid_argument);
  sc = Scenario{};
  sc.store_every = 0;
  CHECK_THROWS_AS(run(p, sc), std::invalid_argument);
  sc = Scenario{};
  sc.duration = 0.0;
  CHECK_THROWS_AS(run(p, sc), std::invalid_argument);
}

TEST_CASE("sample decimation") {
  const ReceiverParams p;
  Scenario sc;
  sc.duration = 20.0 / p.f;
  sc.store_every = 25;
  const SimTrace tr = run(p, sc);
  REQUIRE(tr.verdict == SimVerdict::completed);
  REQUIRE(!tr.samples.empty());
  for (std::size_t i = 1; i < tr.samples.size(); ++i)
    CHECK(tr.samples[i].t > tr.samples[i - 1].t);
  Scenario dense = sc;
  dense.store_every = 1;
  const SimTrace tr2 = run(p, dense);
  CHECK(tr2.samples.size() > 20 * tr.samples.size());
  // decimation must not change the dynamics
  CHECK(tr.cycles.back().v_o == Catch::Approx(tr2.cycles.back().v_o));
}

TEST_CASE("controller callback sees period boundaries") {
  const ReceiverParams p;
  Scenario sc;
  sc.mode = DutyMode::controller;
  sc.duration = 10.0 / p.f;
  sc.store_samples = false;
  std::vector<double> times;
  sc.controller = [&](long n, double t, const SwitchedState& x) {
    times.push_back(t);
    CHECK(t == Catch::Approx(static_cast<double>(n) / p.f).margin(1e-15));
    CHECK(x.v_dc > 0.0);
    return 0.45;
  };
  const SimTrace tr = run(p, sc);
  REQUIRE(tr.verdict == SimVerdict::completed);
  CHECK(times.size() == 10);
  for (const auto& c : tr.cycles) CHECK(c.duty == 0.45);
  // out-of-range commands are clamped, not fatal
  Scenario wild = sc;
  wild.controller = [](long, double, const SwitchedState&) { return 7.0; };
  const SimTrace tw = run(p, wild);
  for (const auto& c : tw.cycles) CHECK(c.duty == 0.98);
}

TEST_CASE("stiff-source plant rides at the programmed input voltage") {
  const ReceiverParams p;
  Scenario sc;
  sc.plant = PlantKind::voltage_source;
  sc.v_in = 17.8253536263;
  sc.d0 = 0.5;
  sc.duration = 8e-3;
  sc.store_samples = false;
  const SimTrace tr = run(p, sc);
  REQUIRE(tr.verdict == SimVerdict::completed);
  for (const auto& c : tr.cycles)
    CHECK(c.v_dc == Catch::Approx(17.8253536263));
  // settles to v_o = d * v_in like any buck
  double last = tr.cycles.back().v_o;
  CHECK(last == Catch::Approx(0.5 * 17.8253536263).epsilon(0.005));
}
