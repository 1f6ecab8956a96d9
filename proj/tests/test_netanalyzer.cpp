#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "wptrx/netanalyzer.hpp"
#include "wptrx/transfer_function.hpp"

using namespace wptrx;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Analytic {
  double mag_db, phase_deg;
};

Analytic analytic_at(const RationalTF& tf, double f) {
  const std::complex<double> h = eval_tf(tf, {0.0, 2.0 * kPi * f});
  return {20.0 * std::log10(std::abs(h)), std::arg(h) * 180.0 / kPi};
}

}  // namespace

TEST_CASE("tone extraction recovers a synthetic signal exactly") {
  const double f_p = 1250.0;
  const int per = 64, n_cyc = 4;
  std::vector<double> t, v;
  for (int i = 0; i < per * n_cyc + 1; ++i) {
    const double ti = i / (f_p * per);
    t.push_back(ti);
    v.push_back(3.0 + 0.5 * std::sin(2.0 * kPi * f_p * ti + kPi / 6.0));
  }
  const double t1 = n_cyc / f_p;
  const ToneFit fit = extract_tone(t, v, f_p, 0.0, t1);
  CHECK(fit.dc == Catch::Approx(3.0).margin(1e-9));
  CHECK(fit.amplitude == Catch::Approx(0.5).margin(1e-9));
  CHECK(fit.phase_deg == Catch::Approx(30.0).margin(1e-7));
}

TEST_CASE("tone extraction rejects off-frequency content by orthogonality") {
  const double f_p = 1000.0;
  const int per = 50, n_cyc = 5;
  std::vector<double> t, v;
  for (int i = 0; i < per * n_cyc + 1; ++i) {
    const double ti = i / (f_p * per);
    t.push_back(ti);
    // target tone plus a harmonic and dc drift-free interferer at 3 f_p
    v.push_back(1.0 + 0.2 * std::sin(2.0 * kPi * f_p * ti - 0.4) +
                0.8 * std::sin(2.0 * kPi * 3.0 * f_p * ti + 1.1));
  }
  const ToneFit fit = extract_tone(t, v, f_p, 0.0, n_cyc / f_p);
  CHECK(fit.amplitude == Catch::Approx(0.2).margin(1e-6));
  CHECK(fit.phase_deg == Catch::Approx(-0.4 * 180.0 / kPi).margin(1e-4));
}

TEST_CASE("tone extraction input validation") {
  const double f_p = 1000.0;
  std::vector<double> t, v;
  for (int i = 0; i < 200; ++i) {
    t.push_back(i * 1e-5);
    v.push_back(std::sin(2.0 * kPi * f_p * i * 1e-5));
  }
  // window of 1.5 periods is not an integer multiple
  CHECK_THROWS_AS(extract_tone(t, v, f_p, 0.0, 1.5e-3), std::invalid_argument);
  // too few samples per period: 2 kHz window with 10 samples per period
  std::vector<double> t2, v2;
  for (int i = 0; i < 20; ++i) {
    t2.push_back(i * 5e-5);
    v2.push_back(0.0);
  }
  CHECK_THROWS_AS(extract_tone(t2, v2, 2000.0, 0.0, 1e-3),
                  std::invalid_argument);
  v.pop_back();
  CHECK_THROWS_AS(extract_tone(t, v, f_p, 0.0, 1e-3), std::invalid_argument);
}

TEST_CASE("single-point measurement matches the analytic response") {
  const ReceiverParams p;
  ProbeConfig cfg;
  const ProbeResult res = probe_point(p, cfg, 2000.0);
  CHECK(res.freq_hz == Catch::Approx(2000.0));  // 100 switching periods

  const Analytic av = analytic_at(tf_vdc(p), res.freq_hz);
  const Analytic ai = analytic_at(tf_il(p), res.freq_hz);
  const Analytic ao = analytic_at(tf_vo(p), res.freq_hz);
  CHECK(res.v_dc.mag_db == Catch::Approx(av.mag_db).margin(0.1));
  CHECK(res.v_dc.phase_deg == Catch::Approx(av.phase_deg).margin(0.5));
  CHECK(res.i_l.mag_db == Catch::Approx(ai.mag_db).margin(0.1));
  CHECK(res.i_l.phase_deg == Catch::Approx(ai.phase_deg).margin(0.5));
  CHECK(res.v_o.mag_db == Catch::Approx(ao.mag_db).margin(0.1));
  CHECK(res.v_o.phase_deg == Catch::Approx(ao.phase_deg).margin(0.5));
}

TEST_CASE("probe frequency snapping") {
  const ReceiverParams p;
  ProbeConfig cfg;
  cfg.settle_periods = 2;
  cfg.measure_periods = 4;
  // 2050 Hz -> 200 kHz / round(97.56) = 200 kHz / 98
  const ProbeResult res = probe_point(p, cfg, 2050.0);
  CHECK(res.freq_hz == Catch::Approx(200e3 / 98.0).epsilon(1e-12));
  // above f_sw/20 there are too few cycle averages per perturbation period
  CHECK_THROWS_AS(probe_point(p, cfg, 11000.0), std::invalid_argument);
  CHECK_NOTHROW(probe_point(p, cfg, 10000.0));  // exactly 20 periods
}

TEST_CASE("smaller perturbations converge on the small-signal response") {
  const ReceiverParams p;
  const double f_t = 5000.0;
  const Analytic ref = analytic_at(tf_vo(p), f_t);
  double prev_err = 1e9;
  for (double amp : {0.02, 0.01, 0.005}) {
    ProbeConfig cfg;
    cfg.amp = amp;
    cfg.settle_periods = 6;
    cfg.measure_periods = 6;
    const ProbeResult res = probe_point(p, cfg, f_t);
    const double err = std::abs(res.v_o.mag_db - ref.mag_db);
    CHECK(err < prev_err + 0.02);  // monotone up to measurement fuzz
    prev_err = err;
  }
  CHECK(prev_err < 0.2);
}

TEST_CASE("sweep table layout and accuracy bands") {
  const ReceiverParams p;
  ProbeConfig cfg;
  const std::vector<double> freqs{100.0, 1000.0, 10000.0};
  const auto rows = frequency_sweep(p, cfg, freqs);
  REQUIRE(rows.size() == 9);
  for (int i = 0; i < 3; ++i) {
    CHECK(rows[3 * i].signal == "v_dc");
    CHECK(rows[3 * i + 1].signal == "i_l");
    CHECK(rows[3 * i + 2].signal == "v_o");
    for (int k = 0; k < 3; ++k) {
      const auto& r = rows[3 * i + k];
      CHECK(r.freq_hz == Catch::Approx(freqs[static_cast<std::size_t>(i)])
                             .epsilon(0.01));
      CHECK(r.err_db == Catch::Approx(r.mag_db - r.analytic_mag_db));
      CHECK(std::abs(r.err_db) < 1.0);
      CHECK(std::abs(r.err_deg) < 5.0);
    }
  }
  // the analytic columns agree with a direct evaluation
  const Analytic a = analytic_at(tf_vdc(p), rows[0].freq_hz);
  CHECK(rows[0].analytic_mag_db == Catch::Approx(a.mag_db).margin(1e-9));
  CHECK(rows[0].analytic_phase_deg == Catch::Approx(a.phase_deg).margin(1e-9));
}

TEST_CASE("sweep of an empty list") {
  const ReceiverParams p;
  CHECK(frequency_sweep(p, ProbeConfig{}, {}).empty());
}

TEST_CASE("measurements are deterministic") {
  const ReceiverParams p;
  ProbeConfig cfg;
  cfg.settle_periods = 3;
  cfg.measure_periods = 4;
  const auto a = frequency_sweep(p, cfg, {700.0, 4000.0});
  const auto b = frequency_sweep(p, cfg, {700.0, 4000.0});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mag_db == b[i].mag_db);        // bit-identical
    CHECK(a[i].phase_deg == b[i].phase_deg);
  }
}

TEST_CASE("probe configuration validation") {
  const ReceiverParams p;
  ProbeConfig cfg;
  cfg.measure_periods = 3;
  CHECK_THROWS_AS(probe_point(p, cfg, 2000.0), std::invalid_argument);
  cfg = ProbeConfig{};
  cfg.settle_periods = 0;
  CHECK_THROWS_AS(probe_point(p, cfg, 2000.0), std::invalid_argument);
  cfg = ProbeConfig{};
  cfg.amp = 0.0;
  CHECK_THROWS_AS(probe_point(p, cfg, 2000.0), std::invalid_argument);
  CHECK_THROWS_AS(probe_point(p, ProbeConfig{}, 0.0), std::invalid_argument);
}
