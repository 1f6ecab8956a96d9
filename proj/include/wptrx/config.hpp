#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "wptrx/receiver_params.hpp"

namespace wptrx {

/// Parse/validation failure with the offending line (0 for CLI overrides).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Flat `key = value` configuration consumed by every CLI command. Unset
/// keys take the documented defaults. Sentinels (zero dt, negative gains,
/// empty lists) mean "derive from the plant at the point of use" and survive
/// a parse/emit round trip unchanged.
struct ToolConfig {
  ReceiverParams plant;

  struct Sim {
    double dt = 0.0;          // 0 -> period/500 at run time
    double duration = 20e-3;
    std::string init = "steady";      // steady | zero
    std::string duty = "constant";    // constant | step | sine
    double step_time = 5e-3;
    double d_after = 0.475;
    double sine_amp = 0.005;
    double sine_freq = 2000.0;
    long store_every = 1;
    bool operator==(const Sim&) const = default;
  } sim;

  std::string tf_which = "vo";  // vdc | il | vo | vs_buck

  struct Bode {
    double f_lo = 1.0;
    double f_hi = 100e3;
    int points_per_decade = 48;
    bool operator==(const Bode&) const = default;
  } bode;

  struct Probe {
    double amp = 0.005;
    int settle_periods = 10;
    int measure_periods = 8;
    double f_lo = 10.0;
    double f_hi = 10e3;
    int points = 12;
    std::vector<double> freqs;  // empty -> log grid from f_lo/f_hi/points
    bool operator==(const Probe&) const = default;
  } probe;

  struct Sweep {
    std::string axis = "c_dc";  // c_dc | d_nom | r | i_ls_amp
    std::vector<double> values; // empty -> 10 log points, nominal/3 .. 3x
    bool operator==(const Sweep&) const = default;
  } sweep;

  struct Controller {
    std::string kind = "dual_loop";  // single_pi | dual_loop
    double kp = -1.0;    // <0 -> dual: designed, single: 0.1
    double ki = -1.0;    // <0 -> dual: designed, single: 10
    double k_ivdc = -1.0;  // <0 -> designed
    double v_ref = -1.0;   // <0 -> steady-state v_o
    std::string plant = "wpt";  // wpt | voltage_source
    std::string event = "none"; // none | gain_step | reference_step
    double event_time = 10e-3;
    double kp_after = 0.1;
    double ref_scale = 1.05;
    double duration = 30e-3;
    bool operator==(const Controller&) const = default;
  } controller;

  struct Margins {
    std::string loop = "outer";  // single | inner | outer
    double f_lo = 1.0;
    double f_hi = 100e3;
    bool operator==(const Margins&) const = default;
  } margins;

  std::string out_dir = "out";

  bool operator==(const ToolConfig&) const = default;
};

bool operator==(const ReceiverParams& a, const ReceiverParams& b);

/// Parse `key = value` text ('#' comments, blank lines ignored). Unknown
/// keys, malformed numbers and per-key range violations throw ConfigError
/// naming the line and rule; the parsed result is cross-checked once at the
/// end. Sentinels are preserved, so parse_config(emit_config(c)) == c.
ToolConfig parse_config(const std::string& text);
ToolConfig load_config_file(const std::string& path);

/// Apply one `key=value` override (CLI layer); run finalize afterwards.
void apply_override(ToolConfig& cfg, const std::string& spec);

/// Cross-field validation; throws ConfigError with line 0.
void finalize(ToolConfig& cfg);

/// Serialize every field in parse order.
std::string emit_config(const ToolConfig& cfg);

}  // namespace wptrx
