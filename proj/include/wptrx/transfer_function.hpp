#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "wptrx/polynomial.hpp"
#include "wptrx/receiver_params.hpp"

namespace wptrx {

/// Rational transfer function num(s)/den(s) with a free-text label used in
/// reports ("dc-link", "inductor-current", "output-voltage", ...).
struct RationalTF {
  Polynomial num;
  Polynomial den;
  std::string label;
};

std::complex<double> eval_tf(const RationalTF& tf, std::complex<double> s);

/// Duty-to-dc-link-voltage small-signal TF. The three plant TFs share the
/// same denominator cubic coefficient-for-coefficient; the duty-dependent
/// scale is folded into the numerator.
RationalTF tf_vdc(const ReceiverParams& p);
/// Duty-to-inductor-current TF.
RationalTF tf_il(const ReceiverParams& p);
/// Duty-to-output-voltage TF. Carries the right-half-plane zero
/// d_nom^2/(c_dc*r) that caps the usable single-loop bandwidth.
RationalTF tf_vo(const ReceiverParams& p);

/// Closed-form numerator roots. The dc-link pair may be complex when
/// (c_o r^2 + l)^2 < 8 c_o r^2 l; callers get the pair either way.
std::array<std::complex<double>, 2> closed_form_zeros_vdc(const ReceiverParams& p);
/// Inductor-current zeros, ascending: { -1/(c_o r), d^2/(c_dc r) }.
std::array<double, 2> closed_form_zeros_il(const ReceiverParams& p);
/// Output-voltage RHP zero d^2/(c_dc r).
double closed_form_zero_vo(const ReceiverParams& p);

/// Conventional buck fed from a stiff voltage source, for side-by-side
/// comparisons: v_in / (1 + (l/r) s + l c_o s^2).
RationalTF voltage_source_buck_tf(double v_in, double l, double c_o, double r);

struct FreqPoint {
  double freq_hz;
  double mag_db;
  double phase_deg;  // unwrapped
};

struct FreqResponse {
  std::vector<FreqPoint> points;
};

/// Log-spaced frequency response with unwrapped phase. The low-frequency
/// anchor is 90 deg per excess zero/pole at the origin, minus 180 deg when
/// the lowest-order gain is negative; unwrapping proceeds upward in
/// frequency. Throws if the grid is too coarse to unwrap reliably
/// (wrapped step beyond 120 deg) or the band is invalid.
FreqResponse bode(const RationalTF& tf, double f_lo, double f_hi,
                  int points_per_decade = 48);

struct PoleZeroSet {
  std::vector<std::complex<double>> poles;
  std::vector<std::complex<double>> zeros;
};

PoleZeroSet pole_zero_map(const RationalTF& tf);

enum class SweepAxis { c_dc, d_nom, r, i_ls_amp };

struct SweepPoint {
  double value;
  PoleZeroSet pz;        // of the output-voltage TF
  double rhp_zero;       // rad/s
  double dc_gain_db;     // 20 log10 |G_vo(0)|
};

/// Re-derives the output-voltage TF with one parameter swept; used to map how
/// the RHP zero and dc gain move with the design knobs.
std::vector<SweepPoint> parameter_sweep(const ReceiverParams& p, SweepAxis axis,
                                        const std::vector<double>& values);

}  // namespace wptrx
