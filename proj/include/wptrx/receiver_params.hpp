#pragma once

namespace wptrx {

/// Physical parameters of the series-series compensated receiver stage.
/// The rectifier feeds the buck input from a rectified-sinusoid current
/// source of amplitude i_ls_amp, one full wave per switching period.
/// Defaults are the reference design (200 kHz, 7 ohm load).
struct ReceiverParams {
  double f = 200e3;        // switching frequency, Hz
  double i_ls_amp = 1.0;   // secondary current amplitude, A
  double c_dc = 30e-6;     // dc-link capacitance, F
  double l = 77e-6;        // buck inductance, H
  double c_o = 40e-6;      // output capacitance, F
  double r = 7.0;          // load resistance, ohm
  double d_nom = 0.5;      // nominal duty cycle

  double period() const { return 1.0 / f; }
};

/// Throws std::invalid_argument if any value is non-positive/non-finite or
/// the nominal duty lies outside (0, 1).
void validate(const ReceiverParams& p);

}  // namespace wptrx
