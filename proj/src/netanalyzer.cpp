#include "wptrx/netanalyzer.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <future>
#include <numbers>
#include <stdexcept>

#include "wptrx/switched_sim.hpp"
#include "wptrx/transfer_function.hpp"

namespace wptrx {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_deg(double a) {
  a = std::fmod(a, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

}  // namespace

ToneFit extract_tone(std::span<const double> t, std::span<const double> v,
                     double f_probe, double t0, double t1) {
  if (t.size() != v.size())
    throw std::invalid_argument("extract_tone: length mismatch");
  if (!(f_probe > 0.0) || !(t1 > t0))
    throw std::invalid_argument("extract_tone: bad window");
  const double cycles = (t1 - t0) * f_probe;
  const double n_cyc = std::round(cycles);
  if (n_cyc < 1.0 || std::abs(cycles - n_cyc) > 1e-6 * cycles)
    throw std::invalid_argument(
        "extract_tone: window must span an integer number of probe periods");

  const double w = 2.0 * kPi * f_probe;
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  long n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] >= t1) continue;
    const double ph = w * (t[i] - t0);
    const Eigen::Vector3d b(1.0, std::cos(ph), std::sin(ph));
    m += b * b.transpose();
    rhs += b * v[i];
    ++n;
  }
  if (n < 20 * static_cast<long>(n_cyc))
    throw std::invalid_argument("extract_tone: needs >= 20 samples per probe period");

  const Eigen::Vector3d c = m.ldlt().solve(rhs);
  ToneFit fit;
  fit.dc = c[0];
  fit.amplitude = std::hypot(c[1], c[2]);
  fit.phase_deg = std::atan2(c[1], c[2]) * 180.0 / kPi;
  return fit;
}

ProbeResult probe_point(const ReceiverParams& p, const ProbeConfig& cfg,
                        double f_probe) {
  validate(p);
  if (!(f_probe > 0.0))
    throw std::invalid_argument("probe_point: probe frequency must be positive");
  if (cfg.settle_periods < 1)
    throw std::invalid_argument("probe_point: settle_periods must be >= 1");
  if (cfg.measure_periods < 4)
    throw std::invalid_argument("probe_point: measure_periods must be >= 4");

  // Snap onto a subharmonic of the switching rate so every probe period
  // holds a whole number of converter cycles.
  const long m = std::lround(p.f / f_probe);
  if (m < 20)
    throw std::invalid_argument(
        "probe_point: probe frequency too close to the switching frequency");
  const double f_snap = p.f / static_cast<double>(m);

  Scenario sc;
  sc.mode = DutyMode::sine;
  sc.d0 = p.d_nom;
  sc.sine_amp = cfg.amp;
  sc.sine_freq = f_snap;
  sc.duration =
      static_cast<double>(cfg.settle_periods + cfg.measure_periods) / f_snap;
  sc.dt = cfg.dt;
  sc.init = InitMode::steady;
  sc.store_samples = false;

  SimTrace trace = run(p, sc);
  if (trace.verdict != SimVerdict::completed)
    throw std::runtime_error("probe_point: simulation diverged");

  const double t0 = static_cast<double>(cfg.settle_periods) / f_snap;
  const double t1 = t0 + static_cast<double>(cfg.measure_periods) / f_snap;

  std::vector<double> ts, duty, vdc, il, vo;
  ts.reserve(trace.cycles.size());
  for (const CycleRow& r : trace.cycles) {
    ts.push_back(r.t);
    duty.push_back(r.duty);
    vdc.push_back(r.v_dc);
    il.push_back(r.i_l);
    vo.push_back(r.v_o);
  }

  // Phases are referenced to the duty tone as actually applied, which
  // cancels the hold and averaging delays shared by every channel.
  const ToneFit fd = extract_tone(ts, duty, f_snap, t0, t1);
  if (fd.amplitude < 0.1 * cfg.amp)
    throw std::runtime_error("probe_point: duty excitation not present");

  auto rel = [&](const std::vector<double>& sig) {
    const ToneFit fs = extract_tone(ts, sig, f_snap, t0, t1);
    ProbePoint pt;
    pt.freq_hz = f_snap;
    pt.mag_db = 20.0 * std::log10(fs.amplitude / fd.amplitude);
    pt.phase_deg = wrap_deg(fs.phase_deg - fd.phase_deg);
    return pt;
  };

  ProbeResult res;
  res.freq_hz = f_snap;
  res.v_dc = rel(vdc);
  res.i_l = rel(il);
  res.v_o = rel(vo);
  return res;
}

std::vector<SweepRow> frequency_sweep(const ReceiverParams& p,
                                      const ProbeConfig& cfg,
                                      const std::vector<double>& freqs) {
  std::vector<std::future<ProbeResult>> jobs;
  jobs.reserve(freqs.size());
  for (double f : freqs)
    jobs.push_back(std::async(std::launch::async,
                              [&p, &cfg, f] { return probe_point(p, cfg, f); }));

  const RationalTF g_vdc = tf_vdc(p), g_il = tf_il(p), g_vo = tf_vo(p);
  std::vector<SweepRow> rows;
  rows.reserve(3 * freqs.size());
  for (auto& job : jobs) {
    const ProbeResult res = job.get();
    const std::complex<double> s(0.0, 2.0 * kPi * res.freq_hz);
    auto add = [&](const char* name, const ProbePoint& pt, const RationalTF& g) {
      const std::complex<double> h = eval_tf(g, s);
      SweepRow row;
      row.freq_hz = res.freq_hz;
      row.signal = name;
      row.mag_db = pt.mag_db;
      row.phase_deg = pt.phase_deg;
      row.analytic_mag_db = 20.0 * std::log10(std::abs(h));
      row.analytic_phase_deg = std::arg(h) * 180.0 / kPi;
      row.err_db = pt.mag_db - row.analytic_mag_db;
      row.err_deg = wrap_deg(pt.phase_deg - row.analytic_phase_deg);
      rows.push_back(row);
    };
    add("v_dc", res.v_dc, g_vdc);
    add("i_l", res.i_l, g_il);
    add("v_o", res.v_o, g_vo);
  }
  return rows;
}

}  // namespace wptrx
