#include "wptrx/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <string_view>

#include "wptrx/csv.hpp"

namespace wptrx {

ConfigError::ConfigError(int line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                  : what),
      line_(line) {}

bool operator==(const ReceiverParams& a, const ReceiverParams& b) {
  return a.f == b.f && a.i_ls_amp == b.i_ls_amp && a.c_dc == b.c_dc &&
         a.l == b.l && a.c_o == b.c_o && a.r == b.r && a.d_nom == b.d_nom;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double num(const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end)
    throw std::invalid_argument("malformed number '" + v + "'");
  return out;
}

long integer(const std::string& v) {
  long out = 0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end)
    throw std::invalid_argument("malformed integer '" + v + "'");
  return out;
}

std::vector<double> num_list(const std::string& v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(num(trim(item)));
  return out;
}

void choice(const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return;
  std::string msg = "'" + v + "' not one of {";
  bool first = true;
  for (const char* a : allowed) {
    msg += first ? "" : ", ";
    msg += a;
    first = false;
  }
  throw std::invalid_argument(msg + "}");
}

double positive(const std::string& v) {
  const double x = num(v);
  if (!(x > 0.0)) throw std::invalid_argument("must be positive");
  return x;
}

double non_negative(const std::string& v) {
  const double x = num(v);
  if (!(x >= 0.0)) throw std::invalid_argument("must be >= 0");
  return x;
}

double fraction(const std::string& v) {
  const double x = num(v);
  if (!(x > 0.0) || !(x < 1.0))
    throw std::invalid_argument("must lie in (0, 1)");
  return x;
}

// Negative means "derive at use time"; zero is never a valid gain.
double gain_or_auto(const std::string& v) {
  const double x = num(v);
  if (x == 0.0)
    throw std::invalid_argument("must be positive, or negative for automatic");
  return x;
}

struct Key {
  const char* name;
  std::function<void(ToolConfig&, const std::string&)> set;
};

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = {
      {"plant.f", [](ToolConfig& c, const std::string& v) { c.plant.f = positive(v); }},
      {"plant.i_ls_amp", [](ToolConfig& c, const std::string& v) { c.plant.i_ls_amp = positive(v); }},
      {"plant.c_dc", [](ToolConfig& c, const std::string& v) { c.plant.c_dc = positive(v); }},
      {"plant.l", [](ToolConfig& c, const std::string& v) { c.plant.l = positive(v); }},
      {"plant.c_o", [](ToolConfig& c, const std::string& v) { c.plant.c_o = positive(v); }},
      {"plant.r", [](ToolConfig& c, const std::string& v) { c.plant.r = positive(v); }},
      {"plant.d_nom", [](ToolConfig& c, const std::string& v) { c.plant.d_nom = fraction(v); }},
      {"sim.dt", [](ToolConfig& c, const std::string& v) { c.sim.dt = non_negative(v); }},
      {"sim.duration", [](ToolConfig& c, const std::string& v) { c.sim.duration = positive(v); }},
      {"sim.init", [](ToolConfig& c, const std::string& v) { choice(v, {"steady", "zero"}); c.sim.init = v; }},
      {"sim.duty", [](ToolConfig& c, const std::string& v) { choice(v, {"constant", "step", "sine"}); c.sim.duty = v; }},
      {"sim.step_time", [](ToolConfig& c, const std::string& v) { c.sim.step_time = non_negative(v); }},
      {"sim.d_after", [](ToolConfig& c, const std::string& v) { c.sim.d_after = fraction(v); }},
      {"sim.sine_amp", [](ToolConfig& c, const std::string& v) { c.sim.sine_amp = positive(v); }},
      {"sim.sine_freq", [](ToolConfig& c, const std::string& v) { c.sim.sine_freq = positive(v); }},
      {"sim.store_every", [](ToolConfig& c, const std::string& v) {
         c.sim.store_every = integer(v);
         if (c.sim.store_every < 1) throw std::invalid_argument("must be >= 1");
       }},
      {"tf.which", [](ToolConfig& c, const std::string& v) { choice(v, {"vdc", "il", "vo", "vs_buck"}); c.tf_which = v; }},
      {"bode.f_lo", [](ToolConfig& c, const std::string& v) { c.bode.f_lo = positive(v); }},
      {"bode.f_hi", [](ToolConfig& c, const std::string& v) { c.bode.f_hi = positive(v); }},
      {"bode.points_per_decade", [](ToolConfig& c, const std::string& v) {
         c.bode.points_per_decade = static_cast<int>(integer(v));
         if (c.bode.points_per_decade < 8) throw std::invalid_argument("must be >= 8");
       }},
      {"probe.amp", [](ToolConfig& c, const std::string& v) { c.probe.amp = positive(v); }},
      {"probe.settle_periods", [](ToolConfig& c, const std::string& v) {
         c.probe.settle_periods = static_cast<int>(integer(v));
         if (c.probe.settle_periods < 1) throw std::invalid_argument("must be >= 1");
       }},
      {"probe.measure_periods", [](ToolConfig& c, const std::string& v) {
         c.probe.measure_periods = static_cast<int>(integer(v));
         if (c.probe.measure_periods < 4) throw std::invalid_argument("must be >= 4");
       }},
      {"probe.f_lo", [](ToolConfig& c, const std::string& v) { c.probe.f_lo = positive(v); }},
      {"probe.f_hi", [](ToolConfig& c, const std::string& v) { c.probe.f_hi = positive(v); }},
      {"probe.points", [](ToolConfig& c, const std::string& v) {
         c.probe.points = static_cast<int>(integer(v));
         if (c.probe.points < 1) throw std::invalid_argument("must be >= 1");
       }},
      {"probe.freqs", [](ToolConfig& c, const std::string& v) {
         c.probe.freqs = num_list(v);
         for (double f : c.probe.freqs)
           if (!(f > 0.0)) throw std::invalid_argument("frequencies must be positive");
       }},
      {"sweep.axis", [](ToolConfig& c, const std::string& v) { choice(v, {"c_dc", "d_nom", "r", "i_ls_amp"}); c.sweep.axis = v; }},
      {"sweep.values", [](ToolConfig& c, const std::string& v) {
         c.sweep.values = num_list(v);
         for (double x : c.sweep.values)
           if (!(x > 0.0)) throw std::invalid_argument("values must be positive");
       }},
      {"controller.kind", [](ToolConfig& c, const std::string& v) { choice(v, {"single_pi", "dual_loop"}); c.controller.kind = v; }},
      {"controller.kp", [](ToolConfig& c, const std::string& v) { c.controller.kp = gain_or_auto(v); }},
      {"controller.ki", [](ToolConfig& c, const std::string& v) { c.controller.ki = gain_or_auto(v); }},
      {"controller.k_ivdc", [](ToolConfig& c, const std::string& v) { c.controller.k_ivdc = gain_or_auto(v); }},
      {"controller.v_ref", [](ToolConfig& c, const std::string& v) { c.controller.v_ref = gain_or_auto(v); }},
      {"controller.plant", [](ToolConfig& c, const std::string& v) { choice(v, {"wpt", "voltage_source"}); c.controller.plant = v; }},
      {"controller.event", [](ToolConfig& c, const std::string& v) { choice(v, {"none", "gain_step", "reference_step"}); c.controller.event = v; }},
      {"controller.event_time", [](ToolConfig& c, const std::string& v) { c.controller.event_time = non_negative(v); }},
      {"controller.kp_after", [](ToolConfig& c, const std::string& v) { c.controller.kp_after = positive(v); }},
      {"controller.ref_scale", [](ToolConfig& c, const std::string& v) { c.controller.ref_scale = positive(v); }},
      {"controller.duration", [](ToolConfig& c, const std::string& v) { c.controller.duration = positive(v); }},
      {"margins.loop", [](ToolConfig& c, const std::string& v) { choice(v, {"single", "inner", "outer"}); c.margins.loop = v; }},
      {"margins.f_lo", [](ToolConfig& c, const std::string& v) { c.margins.f_lo = positive(v); }},
      {"margins.f_hi", [](ToolConfig& c, const std::string& v) { c.margins.f_hi = positive(v); }},
      {"out.dir", [](ToolConfig& c, const std::string& v) {
         if (v.empty()) throw std::invalid_argument("must not be empty");
         c.out_dir = v;
       }},
  };
  return keys;
}

void set_key(ToolConfig& cfg, const std::string& key, const std::string& value,
             int line) {
  for (const Key& k : key_table())
    if (key == k.name) {
      try {
        k.set(cfg, value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(line, key + ": " + e.what());
      }
      return;
    }
  throw ConfigError(line, "unknown key '" + key + "'");
}

}  // namespace

ToolConfig parse_config(const std::string& text) {
  ToolConfig cfg;
  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "expected 'key = value'");
    set_key(cfg, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)),
            line);
  }
  finalize(cfg);
  return cfg;
}

ToolConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply_override(ToolConfig& cfg, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw ConfigError(0, "override must look like key=value: '" + spec + "'");
  set_key(cfg, trim(spec.substr(0, eq)), trim(spec.substr(eq + 1)), 0);
}

void finalize(ToolConfig& cfg) {
  try {
    validate(cfg.plant);
  } catch (const std::exception& e) {
    throw ConfigError(0, e.what());
  }
  const double period = cfg.plant.period();
  if (cfg.sim.dt > period / 200.0)
    throw ConfigError(0, "sim.dt: must not exceed period/200");
  if (!(cfg.bode.f_lo < cfg.bode.f_hi))
    throw ConfigError(0, "bode: need f_lo < f_hi");
  if (!(cfg.probe.f_lo < cfg.probe.f_hi))
    throw ConfigError(0, "probe: need f_lo < f_hi");
  if (cfg.probe.f_hi > cfg.plant.f / 20.0)
    throw ConfigError(0, "probe.f_hi: must stay below a twentieth of plant.f");
  for (double f : cfg.probe.freqs)
    if (f > cfg.plant.f / 20.0)
      throw ConfigError(0, "probe.freqs: must stay below a twentieth of plant.f");
  if (cfg.sweep.axis == "d_nom")
    for (double v : cfg.sweep.values)
      if (!(v < 1.0))
        throw ConfigError(0, "sweep.values: duty values must lie in (0, 1)");
  if (!(cfg.margins.f_lo < cfg.margins.f_hi))
    throw ConfigError(0, "margins: need f_lo < f_hi");
}

std::string emit_config(const ToolConfig& cfg) {
  auto join = [](const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i)
      out += (i ? "," : "") + format_double(xs[i]);
    return out;
  };
  std::ostringstream out;
  auto kv = [&](const char* k, const std::string& v) { out << k << " = " << v << '\n'; };
  auto kd = [&](const char* k, double v) { kv(k, format_double(v)); };
  auto ki = [&](const char* k, long v) { kv(k, std::to_string(v)); };

  kd("plant.f", cfg.plant.f);
  kd("plant.i_ls_amp", cfg.plant.i_ls_amp);
  kd("plant.c_dc", cfg.plant.c_dc);
  kd("plant.l", cfg.plant.l);
  kd("plant.c_o", cfg.plant.c_o);
  kd("plant.r", cfg.plant.r);
  kd("plant.d_nom", cfg.plant.d_nom);
  kd("sim.dt", cfg.sim.dt);
  kd("sim.duration", cfg.sim.duration);
  kv("sim.init", cfg.sim.init);
  kv("sim.duty", cfg.sim.duty);
  kd("sim.step_time", cfg.sim.step_time);
  kd("sim.d_after", cfg.sim.d_after);
  kd("sim.sine_amp", cfg.sim.sine_amp);
  kd("sim.sine_freq", cfg.sim.sine_freq);
  ki("sim.store_every", cfg.sim.store_every);
  kv("tf.which", cfg.tf_which);
  kd("bode.f_lo", cfg.bode.f_lo);
  kd("bode.f_hi", cfg.bode.f_hi);
  ki("bode.points_per_decade", cfg.bode.points_per_decade);
  kd("probe.amp", cfg.probe.amp);
  ki("probe.settle_periods", cfg.probe.settle_periods);
  ki("probe.measure_periods", cfg.probe.measure_periods);
  kd("probe.f_lo", cfg.probe.f_lo);
  kd("probe.f_hi", cfg.probe.f_hi);
  ki("probe.points", cfg.probe.points);
  kv("probe.freqs", join(cfg.probe.freqs));
  kv("sweep.axis", cfg.sweep.axis);
  kv("sweep.values", join(cfg.sweep.values));
  kv("controller.kind", cfg.controller.kind);
  kd("controller.kp", cfg.controller.kp);
  kd("controller.ki", cfg.controller.ki);
  kd("controller.k_ivdc", cfg.controller.k_ivdc);
  kd("controller.v_ref", cfg.controller.v_ref);
  kv("controller.plant", cfg.controller.plant);
  kv("controller.event", cfg.controller.event);
  kd("controller.event_time", cfg.controller.event_time);
  kd("controller.kp_after", cfg.controller.kp_after);
  kd("controller.ref_scale", cfg.controller.ref_scale);
  kd("controller.duration", cfg.controller.duration);
  kv("margins.loop", cfg.margins.loop);
  kd("margins.f_lo", cfg.margins.f_lo);
  kd("margins.f_hi", cfg.margins.f_hi);
  kv("out.dir", cfg.out_dir);
  return out.str();
}

}  // namespace wptrx
