#include "wptrx/transfer_function.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wptrx/avg_model.hpp"

namespace wptrx {

namespace {

constexpr double kPi = std::numbers::pi;

// The cubic every duty-input TF of this plant shares.
Polynomial plant_denominator(const ReceiverParams& p) {
  const double d2 = p.d_nom * p.d_nom;
  return Polynomial{d2,
                    p.c_o * p.r * d2 + p.c_dc * p.r,
                    p.c_dc * p.l,
                    p.c_o * p.c_dc * p.l * p.r};
}

}  // namespace

std::complex<double> eval_tf(const RationalTF& tf, std::complex<double> s) {
  return tf.num.eval(s) / tf.den.eval(s);
}

RationalTF tf_vdc(const ReceiverParams& p) {
  validate(p);
  const double scale = -2.0 * p.i_ls_amp / (kPi * p.d_nom);
  Polynomial num{2.0 * p.r, p.c_o * p.r * p.r + p.l, p.c_o * p.l * p.r};
  return {num * scale, plant_denominator(p), "dc-link"};
}

RationalTF tf_il(const ReceiverParams& p) {
  validate(p);
  const double d2 = p.d_nom * p.d_nom;
  const double scale = 2.0 * p.i_ls_amp / (kPi * d2);
  // (c_dc r s - d^2)(c_o r s + 1) expanded.
  Polynomial num{-d2, p.r * (p.c_dc - d2 * p.c_o), p.c_dc * p.c_o * p.r * p.r};
  return {num * scale, plant_denominator(p), "inductor-current"};
}

RationalTF tf_vo(const ReceiverParams& p) {
  validate(p);
  const double d2 = p.d_nom * p.d_nom;
  const double scale = 2.0 * p.r * p.i_ls_amp / (kPi * d2);
  Polynomial num{-d2, p.c_dc * p.r};
  return {num * scale, plant_denominator(p), "output-voltage"};
}

std::array<std::complex<double>, 2> closed_form_zeros_vdc(
    const ReceiverParams& p) {
  validate(p);
  const double a = p.c_o * p.l * p.r;            // quadratic coefficient
  const double bq = p.c_o * p.r * p.r + p.l;
  const double disc = bq * bq - 8.0 * p.c_o * p.r * p.r * p.l;
  const std::complex<double> root = std::sqrt(std::complex<double>(disc, 0.0));
  std::array<std::complex<double>, 2> z{(-bq + root) / (2.0 * a),
                                        (-bq - root) / (2.0 * a)};
  if (z[0].real() > z[1].real() ||
      (z[0].real() == z[1].real() && z[0].imag() > z[1].imag()))
    std::swap(z[0], z[1]);
  return z;  // sorted by (real, imag) ascending
}

std::array<double, 2> closed_form_zeros_il(const ReceiverParams& p) {
  validate(p);
  return {-1.0 / (p.c_o * p.r), p.d_nom * p.d_nom / (p.c_dc * p.r)};
}

double closed_form_zero_vo(const ReceiverParams& p) {
  validate(p);
  return p.d_nom * p.d_nom / (p.c_dc * p.r);
}

RationalTF voltage_source_buck_tf(double v_in, double l, double c_o, double r) {
  if (!(v_in > 0.0) || !(l > 0.0) || !(c_o > 0.0) || !(r > 0.0))
    throw std::invalid_argument("voltage_source_buck_tf: parameters must be positive");
  return {Polynomial{v_in}, Polynomial{1.0, l / r, l * c_o}, "voltage-source-buck"};
}

namespace {

std::size_t lowest_nonzero(const Polynomial& p) {
  const auto& c = p.coeffs();
  const double tol = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k)
    if (std::abs(c[k]) > tol) return k;
  return c.size();
}

}  // namespace

FreqResponse bode(const RationalTF& tf, double f_lo, double f_hi,
                  int points_per_decade) {
  if (!(f_lo > 0.0) || !(f_hi > f_lo))
    throw std::invalid_argument("bode: need 0 < f_lo < f_hi");
  if (points_per_decade < 4)
    throw std::invalid_argument("bode: points_per_decade must be >= 4");

  const double decades = std::log10(f_hi / f_lo);
  const int n = std::max(2, static_cast<int>(std::ceil(decades * points_per_decade)) + 1);

  // Low-frequency asymptote: 90 deg per net zero order at the origin, with
  // the extra -180 deg when the leading gain is negative. Unwrapping walks
  // upward in frequency from there.
  const std::size_t mn = lowest_nonzero(tf.num);
  const std::size_t md = lowest_nonzero(tf.den);
  if (mn >= tf.num.coeffs().size())
    throw std::invalid_argument("bode: zero numerator");
  const double lead = tf.num[mn] / tf.den[md];
  const double anchor =
      90.0 * (static_cast<double>(mn) - static_cast<double>(md)) +
      (lead < 0.0 ? -180.0 : 0.0);

  FreqResponse out;
  out.points.reserve(n);
  double prev_raw = 0.0, prev_unwrapped = 0.0;
  for (int i = 0; i < n; ++i) {
    const double fq = f_lo * std::pow(10.0, decades * i / (n - 1));
    const std::complex<double> h = eval_tf(tf, {0.0, 2.0 * kPi * fq});
    double mag = std::abs(h);
    mag = std::max(mag, 1e-300);
    const double raw = std::atan2(h.imag(), h.real()) * 180.0 / kPi;
    double unwrapped;
    if (i == 0) {
      unwrapped = raw + 360.0 * std::round((anchor - raw) / 360.0);
    } else {
      double delta = raw - prev_raw;
      delta -= 360.0 * std::round(delta / 360.0);
      if (std::abs(delta) > 120.0)
        throw std::runtime_error(
            "bode: frequency grid too coarse to unwrap phase reliably");
      unwrapped = prev_unwrapped + delta;
    }
    out.points.push_back({fq, 20.0 * std::log10(mag), unwrapped});
    prev_raw = raw;
    prev_unwrapped = unwrapped;
  }
  return out;
}

PoleZeroSet pole_zero_map(const RationalTF& tf) {
  PoleZeroSet pz;
  pz.poles = poly_roots(tf.den);
  if (!tf.num.is_zero() && tf.num.degree() > 0) pz.zeros = poly_roots(tf.num);
  return pz;
}

std::vector<SweepPoint> parameter_sweep(const ReceiverParams& p, SweepAxis axis,
                                        const std::vector<double>& values) {
  std::vector<SweepPoint> out;
  out.reserve(values.size());
  for (double v : values) {
    ReceiverParams q = p;
    switch (axis) {
      case SweepAxis::c_dc: q.c_dc = v; break;
      case SweepAxis::d_nom: q.d_nom = v; break;
      case SweepAxis::r: q.r = v; break;
      case SweepAxis::i_ls_amp: q.i_ls_amp = v; break;
    }
    validate(q);
    RationalTF g = tf_vo(q);
    SweepPoint pt;
    pt.value = v;
    pt.pz = pole_zero_map(g);
    pt.rhp_zero = closed_form_zero_vo(q);
    pt.dc_gain_db = 20.0 * std::log10(std::abs(g.num[0] / g.den[0]));
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace wptrx
