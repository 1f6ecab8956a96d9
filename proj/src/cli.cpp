#include "wptrx/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "wptrx/avg_model.hpp"
#include "wptrx/control_design.hpp"
#include "wptrx/csv.hpp"
#include "wptrx/netanalyzer.hpp"
#include "wptrx/switched_sim.hpp"
#include "wptrx/transfer_function.hpp"

namespace wptrx {

namespace {

namespace fs = std::filesystem;

std::string path_in(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

RationalTF select_tf(const ToolConfig& cfg) {
  const ReceiverParams& p = cfg.plant;
  if (cfg.tf_which == "vdc") return tf_vdc(p);
  if (cfg.tf_which == "il") return tf_il(p);
  if (cfg.tf_which == "vo") return tf_vo(p);
  return voltage_source_buck_tf(steady_state(p).v_dc, p.l, p.c_o, p.r);
}

CompensatorPI resolve_pi(const ToolConfig& cfg, bool dual) {
  CompensatorPI pi{cfg.controller.kp, cfg.controller.ki};
  if (dual) {
    const DualLoopDesign d = design_dual_loop(cfg.plant);
    if (pi.kp < 0.0) pi.kp = d.pi.kp;
    if (pi.ki < 0.0) pi.ki = d.pi.ki;
  } else {
    if (pi.kp < 0.0) pi.kp = 0.1;
    if (pi.ki < 0.0) pi.ki = 10.0;
  }
  return pi;
}

double resolve_k_ivdc(const ToolConfig& cfg) {
  return cfg.controller.k_ivdc > 0.0 ? cfg.controller.k_ivdc
                                     : design_k_ivdc(cfg.plant);
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> out;
  if (n <= 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < n; ++i)
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return out;
}

double nominal_of(const ReceiverParams& p, const std::string& axis) {
  if (axis == "c_dc") return p.c_dc;
  if (axis == "d_nom") return p.d_nom;
  if (axis == "r") return p.r;
  return p.i_ls_amp;
}

SweepAxis axis_of(const std::string& axis) {
  if (axis == "c_dc") return SweepAxis::c_dc;
  if (axis == "d_nom") return SweepAxis::d_nom;
  if (axis == "r") return SweepAxis::r;
  return SweepAxis::i_ls_amp;
}

void write_trace_files(const std::string& out_dir, const SimTrace& trace) {
  std::vector<std::vector<CsvCell>> rows;
  rows.reserve(trace.samples.size());
  for (const TracePoint& s : trace.samples)
    rows.push_back({s.t, s.v_dc, s.i_l, s.v_o, s.duty, s.i_r});
  write_csv(path_in(out_dir, "trace.csv"),
            {"t_s", "v_dc_v", "i_l_a", "v_o_v", "duty", "i_r_a"}, rows);

  rows.clear();
  rows.reserve(trace.cycles.size());
  for (const CycleRow& c : trace.cycles)
    rows.push_back({c.n, c.t, c.v_dc, c.i_l, c.v_o, c.duty});
  write_csv(path_in(out_dir, "cycle_avg.csv"),
            {"n", "t_s", "v_dc_avg_v", "i_l_avg_a", "v_o_avg_v", "duty_avg"},
            rows);
}

const char* verdict_name(SimVerdict v) {
  return v == SimVerdict::completed ? "completed" : "diverged";
}

std::string cmd_steady(const ToolConfig& cfg, const std::string& out_dir) {
  const OperatingPoint op = steady_state(cfg.plant);
  const auto eig = eigenvalues(linearize(cfg.plant));
  std::vector<std::pair<std::string, std::string>> kv = {
      {"d", format_double(op.d)},
      {"v_dc_v", format_double(op.v_dc)},
      {"i_l_a", format_double(op.i_l)},
      {"v_o_v", format_double(op.v_o)},
      {"source_avg_a", format_double(op.i_l * op.d)},
  };
  for (int i = 0; i < 3; ++i) {
    kv.emplace_back("pole_" + std::to_string(i + 1) + "_re_rad_per_s",
                    format_double(eig[i].real()));
    kv.emplace_back("pole_" + std::to_string(i + 1) + "_im_rad_per_s",
                    format_double(eig[i].imag()));
  }
  write_report(path_in(out_dir, "steady.txt"), kv);
  std::ostringstream s;
  s << "steady: v_dc=" << format_double(op.v_dc)
    << " V, i_l=" << format_double(op.i_l)
    << " A, v_o=" << format_double(op.v_o) << " V -> steady.txt";
  return s.str();
}

std::string join_coeffs(const Polynomial& p) {
  std::string out;
  for (std::size_t i = 0; i < p.coeffs().size(); ++i)
    out += (i ? "," : "") + format_double(p.coeffs()[i]);
  return out;
}

std::string cmd_tf(const ToolConfig& cfg, const std::string& out_dir) {
  const RationalTF tf = select_tf(cfg);
  const double dc = tf.num[0] / tf.den[0];
  write_report(path_in(out_dir, "tf.txt"),
               {{"label", tf.label},
                {"num_ascending", join_coeffs(tf.num)},
                {"den_ascending", join_coeffs(tf.den)},
                {"dc_gain", format_double(dc)},
                {"dc_gain_db", format_double(20.0 * std::log10(std::abs(dc)))}});
  std::ostringstream s;
  s << "tf " << cfg.tf_which << ": degree " << tf.num.degree() << "/"
    << tf.den.degree() << ", dc gain " << format_double(dc) << " -> tf.txt";
  return s.str();
}

std::string cmd_pzmap(const ToolConfig& cfg, const std::string& out_dir) {
  const RationalTF tf = select_tf(cfg);
  const PoleZeroSet pz = pole_zero_map(tf);
  std::vector<std::vector<CsvCell>> rows;
  for (const auto& z : pz.zeros)
    rows.push_back({"zero", z.real(), z.imag()});
  for (const auto& pole : pz.poles)
    rows.push_back({"pole", pole.real(), pole.imag()});
  write_csv(path_in(out_dir, "pz.csv"),
            {"kind", "re_rad_per_s", "im_rad_per_s"}, rows);
  int rhp = 0;
  for (const auto& z : pz.zeros)
    if (z.real() > 0.0) ++rhp;
  std::ostringstream s;
  s << "pzmap " << cfg.tf_which << ": " << pz.poles.size() << " poles, "
    << pz.zeros.size() << " zeros (" << rhp
    << " right-half-plane) -> pz.csv";
  return s.str();
}

std::string cmd_bode(const ToolConfig& cfg, const std::string& out_dir) {
  const RationalTF tf = select_tf(cfg);
  const FreqResponse fr =
      bode(tf, cfg.bode.f_lo, cfg.bode.f_hi, cfg.bode.points_per_decade);
  std::vector<std::vector<CsvCell>> rows;
  rows.reserve(fr.points.size());
  for (const FreqPoint& pt : fr.points)
    rows.push_back({pt.freq_hz, pt.mag_db, pt.phase_deg});
  write_csv(path_in(out_dir, "bode.csv"), {"freq_hz", "mag_db", "phase_deg"},
            rows);
  std::ostringstream s;
  s << "bode " << cfg.tf_which << ": " << fr.points.size() << " points, "
    << format_double(cfg.bode.f_lo) << " Hz to " << format_double(cfg.bode.f_hi)
    << " Hz -> bode.csv";
  return s.str();
}

std::string cmd_sweep(const ToolConfig& cfg, const std::string& out_dir) {
  std::vector<double> values = cfg.sweep.values;
  if (values.empty()) {
    const double nom = nominal_of(cfg.plant, cfg.sweep.axis);
    const double hi =
        cfg.sweep.axis == "d_nom" ? std::min(3.0 * nom, 0.95) : 3.0 * nom;
    values = log_grid(nom / 3.0, hi, 10);
  }
  const auto points = parameter_sweep(cfg.plant, axis_of(cfg.sweep.axis), values);
  std::vector<std::vector<CsvCell>> rows;
  for (const SweepPoint& pt : points) {
    std::vector<CsvCell> row{pt.value, pt.dc_gain_db, pt.rhp_zero};
    for (int i = 0; i < 3; ++i) {
      const bool have = i < static_cast<int>(pt.pz.poles.size());
      row.emplace_back(have ? pt.pz.poles[i].real() : 0.0);
      row.emplace_back(have ? pt.pz.poles[i].imag() : 0.0);
    }
    rows.push_back(std::move(row));
  }
  write_csv(path_in(out_dir, "sweep.csv"),
            {"value", "dc_gain_db", "zero_rad_per_s", "p_re_1", "p_im_1",
             "p_re_2", "p_im_2", "p_re_3", "p_im_3"},
            rows);
  std::ostringstream s;
  s << "sweep " << cfg.sweep.axis << ": " << points.size()
    << " points -> sweep.csv";
  return s.str();
}

std::string cmd_sim(const ToolConfig& cfg, const std::string& out_dir) {
  Scenario sc;
  sc.d0 = cfg.plant.d_nom;
  sc.duration = cfg.sim.duration;
  sc.dt = cfg.sim.dt;
  sc.init = cfg.sim.init == "zero" ? InitMode::zero : InitMode::steady;
  sc.store_every = cfg.sim.store_every;
  if (cfg.sim.duty == "step") {
    sc.mode = DutyMode::step;
    sc.step_time = cfg.sim.step_time;
    sc.d_after = cfg.sim.d_after;
  } else if (cfg.sim.duty == "sine") {
    sc.mode = DutyMode::sine;
    sc.sine_amp = cfg.sim.sine_amp;
    sc.sine_freq = cfg.sim.sine_freq;
  }
  const SimTrace trace = run(cfg.plant, sc);
  write_trace_files(out_dir, trace);
  std::ostringstream s;
  s << "sim " << cfg.sim.duty << ": " << verdict_name(trace.verdict) << " at t="
    << format_double(trace.t_end) << " s, " << trace.samples.size()
    << " samples, " << trace.cycles.size()
    << " cycle rows -> trace.csv, cycle_avg.csv";
  return s.str();
}

std::string cmd_probe(const ToolConfig& cfg, const std::string& out_dir) {
  std::vector<double> freqs = cfg.probe.freqs;
  if (freqs.empty())
    freqs = log_grid(cfg.probe.f_lo, cfg.probe.f_hi, cfg.probe.points);
  ProbeConfig pc;
  pc.amp = cfg.probe.amp;
  pc.settle_periods = cfg.probe.settle_periods;
  pc.measure_periods = cfg.probe.measure_periods;
  pc.dt = cfg.sim.dt;
  const auto rows = frequency_sweep(cfg.plant, pc, freqs);
  std::vector<std::vector<CsvCell>> out;
  double worst_db = 0.0, worst_deg = 0.0;
  for (const SweepRow& r : rows) {
    out.push_back({r.freq_hz, r.signal, r.mag_db, r.phase_deg,
                   r.analytic_mag_db, r.analytic_phase_deg, r.err_db,
                   r.err_deg});
    worst_db = std::max(worst_db, std::abs(r.err_db));
    worst_deg = std::max(worst_deg, std::abs(r.err_deg));
  }
  write_csv(path_in(out_dir, "probe.csv"),
            {"freq_hz", "signal", "mag_db", "phase_deg", "analytic_mag_db",
             "analytic_phase_deg", "err_db", "err_deg"},
            out);
  std::ostringstream s;
  s << "probe: " << freqs.size() << " frequencies, worst |err| "
    << format_double(worst_db) << " dB / " << format_double(worst_deg)
    << " deg -> probe.csv";
  return s.str();
}

std::string cmd_design(const ToolConfig& cfg, const std::string& out_dir) {
  const ReceiverParams& p = cfg.plant;
  const DualLoopDesign d = design_dual_loop(p);
  const StabilityMargins inner =
      margins(inner_loop_gain(p, d.k_ivdc), 1.0, p.f / 2.0);
  const StabilityMargins outer =
      margins(outer_loop_gain(p, d.k_ivdc, d.pi), 1.0, p.f / 2.0);
  const CharacteristicStability ch =
      characteristic_stability(outer_loop_gain(p, d.k_ivdc, d.pi));
  write_report(
      path_in(out_dir, "design.txt"),
      {{"k_ivdc", format_double(d.k_ivdc)},
       {"kp", format_double(d.pi.kp)},
       {"ki", format_double(d.pi.ki)},
       {"kp_bound", format_double(d.kp_limit)},
       {"inner_crossover_hz", format_double(inner.crossover_hz)},
       {"inner_phase_margin_deg", format_double(inner.phase_margin_deg)},
       {"outer_crossover_hz", format_double(outer.crossover_hz)},
       {"outer_phase_margin_deg", format_double(outer.phase_margin_deg)},
       {"outer_gain_margin_db",
        outer.has_gain_margin ? format_double(outer.gain_margin_db) : "none"},
       {"outer_phase_cross_hz",
        outer.has_gain_margin ? format_double(outer.phase_cross_hz) : "none"},
       {"closed_loop_stable", ch.stable ? "yes" : "no"},
       {"closed_loop_rhp_roots", std::to_string(ch.rhp_count)}});
  std::ostringstream s;
  s << "design: k_ivdc=" << format_double(d.k_ivdc)
    << ", kp=" << format_double(d.pi.kp) << " (limit "
    << format_double(d.kp_limit) << "), ki=" << format_double(d.pi.ki)
    << ", outer pm=" << format_double(outer.phase_margin_deg)
    << " deg -> design.txt";
  return s.str();
}

RationalTF select_loop(const ToolConfig& cfg) {
  const ReceiverParams& p = cfg.plant;
  if (cfg.margins.loop == "inner")
    return inner_loop_gain(p, resolve_k_ivdc(cfg));
  if (cfg.margins.loop == "outer")
    return outer_loop_gain(p, resolve_k_ivdc(cfg), resolve_pi(cfg, true));
  const CompensatorPI pi = resolve_pi(cfg, false);
  const RationalTF plant =
      cfg.controller.plant == "voltage_source"
          ? voltage_source_buck_tf(steady_state(p).v_dc, p.l, p.c_o, p.r)
          : tf_vo(p);
  return single_loop_gain(pi, plant);
}

std::string cmd_margins(const ToolConfig& cfg, const std::string& out_dir) {
  const StabilityMargins m =
      margins(select_loop(cfg), cfg.margins.f_lo, cfg.margins.f_hi);
  write_report(
      path_in(out_dir, "margins.txt"),
      {{"loop", cfg.margins.loop},
       {"crossover_hz", m.has_crossover ? format_double(m.crossover_hz) : "none"},
       {"phase_margin_deg",
        m.has_crossover ? format_double(m.phase_margin_deg) : "none"},
       {"phase_cross_hz",
        m.has_gain_margin ? format_double(m.phase_cross_hz) : "none"},
       {"gain_margin_db",
        m.has_gain_margin ? format_double(m.gain_margin_db) : "none"}});
  std::ostringstream s;
  s << "margins " << cfg.margins.loop << ": ";
  if (m.has_crossover)
    s << "crossover " << format_double(m.crossover_hz) << " Hz, pm "
      << format_double(m.phase_margin_deg) << " deg";
  else
    s << "no unity crossing";
  if (m.has_gain_margin)
    s << ", gm " << format_double(m.gain_margin_db) << " dB at "
      << format_double(m.phase_cross_hz) << " Hz";
  s << " -> margins.txt";
  return s.str();
}

std::string cmd_closedloop(const ToolConfig& cfg, const std::string& out_dir) {
  const bool dual = cfg.controller.kind == "dual_loop";
  ControllerSpec ctrl;
  ctrl.kind = dual ? ControllerKind::dual_loop : ControllerKind::single_pi;
  ctrl.pi = resolve_pi(cfg, dual);
  ctrl.k_ivdc = cfg.controller.k_ivdc > 0.0 ? cfg.controller.k_ivdc : 0.0;
  ctrl.v_ref = cfg.controller.v_ref > 0.0 ? cfg.controller.v_ref : 0.0;
  ctrl.plant = cfg.controller.plant == "voltage_source"
                   ? PlantKind::voltage_source
                   : PlantKind::wpt;

  ClosedLoopScenario sc;
  sc.duration = cfg.controller.duration;
  if (cfg.controller.event == "gain_step")
    sc.event = ClEvent::gain_step;
  else if (cfg.controller.event == "reference_step")
    sc.event = ClEvent::reference_step;
  sc.event_time = cfg.controller.event_time;
  sc.kp_after = cfg.controller.kp_after;
  sc.ref_scale = cfg.controller.ref_scale;
  sc.dt = cfg.sim.dt;
  sc.store_every = cfg.sim.store_every;

  const ClosedLoopResult res = closed_loop_sim(cfg.plant, ctrl, sc);
  write_trace_files(out_dir, res.trace);
  const double last_duty =
      res.trace.cycles.empty() ? cfg.plant.d_nom : res.trace.cycles.back().duty;
  write_report(
      path_in(out_dir, "closedloop.txt"),
      {{"kind", cfg.controller.kind},
       {"plant", cfg.controller.plant},
       {"event", cfg.controller.event},
       {"verdict", verdict_name(res.verdict)},
       {"max_err_after_settle_v", format_double(res.max_err_after_settle)},
       {"final_duty", format_double(last_duty)}});
  std::ostringstream s;
  s << "closedloop " << cfg.controller.kind << ": "
    << verdict_name(res.verdict) << ", settle error "
    << format_double(res.max_err_after_settle)
    << " V -> closedloop.txt, trace.csv, cycle_avg.csv";
  return s.str();
}

}  // namespace

std::string dispatch(const std::string& command, const ToolConfig& cfg,
                     const std::string& out_dir) {
  fs::create_directories(out_dir);
  if (command == "steady") return cmd_steady(cfg, out_dir);
  if (command == "tf") return cmd_tf(cfg, out_dir);
  if (command == "pzmap") return cmd_pzmap(cfg, out_dir);
  if (command == "bode") return cmd_bode(cfg, out_dir);
  if (command == "sweep") return cmd_sweep(cfg, out_dir);
  if (command == "sim") return cmd_sim(cfg, out_dir);
  if (command == "probe") return cmd_probe(cfg, out_dir);
  if (command == "design") return cmd_design(cfg, out_dir);
  if (command == "margins") return cmd_margins(cfg, out_dir);
  if (command == "closedloop") return cmd_closedloop(cfg, out_dir);
  throw std::invalid_argument("unknown command '" + command + "'");
}

int run_cli(int argc, char** argv) {
  CLI::App app{"series-series wireless receiver: buck-stage analysis toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_flag;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_flag, "output directory (else $WPTRX_OUT, else out.dir)");
  app.add_option("--override", overrides, "key=value applied after the config file");

  const char* names[] = {"steady", "tf",    "pzmap",  "bode",    "sweep",
                         "sim",    "probe", "design", "margins", "closedloop"};
  const char* descs[] = {
      "averaged operating point and small-signal poles",
      "selected transfer function coefficients",
      "pole/zero map of the selected transfer function",
      "frequency response table of the selected transfer function",
      "pole/zero/dc-gain trends across one parameter",
      "open-loop switched time-domain run",
      "switched-model frequency response vs the analytic model",
      "dual-loop compensator design with margins",
      "stability margins of the selected loop gain",
      "closed-loop switched run with the sampled controller"};
  for (int i = 0; i < 10; ++i)
    app.add_subcommand(names[i], descs[i])->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    ToolConfig cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path);
    for (const std::string& o : overrides) apply_override(cfg, o);
    finalize(cfg);

    std::string out_dir = out_flag;
    if (out_dir.empty())
      if (const char* env = std::getenv("WPTRX_OUT")) out_dir = env;
    if (out_dir.empty()) out_dir = cfg.out_dir;

    std::cout << dispatch(app.get_subcommands().front()->get_name(), cfg,
                          out_dir)
              << std::endl;
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}

}  // namespace wptrx
