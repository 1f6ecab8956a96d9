#include "wptrx/avg_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wptrx {

void validate(const ReceiverParams& p) {
  auto pos = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0)
      throw std::invalid_argument(std::string(name) +
                                  " must be finite and positive");
  };
  pos(p.f, "f");
  pos(p.i_ls_amp, "i_ls_amp");
  pos(p.c_dc, "c_dc");
  pos(p.l, "l");
  pos(p.c_o, "c_o");
  pos(p.r, "r");
  if (!std::isfinite(p.d_nom) || p.d_nom <= 0.0 || p.d_nom >= 1.0)
    throw std::invalid_argument("d_nom must lie in (0, 1)");
}

OperatingPoint steady_state_at(const ReceiverParams& p, double d) {
  validate(p);
  if (!std::isfinite(d) || d <= 0.0 || d > 1.0)
    throw std::invalid_argument("duty must lie in (0, 1]");
  // Mean of the rectified source is 2*i_ls_amp/pi; the buck scales it by d.
  const double i_avg = 2.0 * p.i_ls_amp / std::numbers::pi;
  OperatingPoint op;
  op.v_dc = i_avg * p.r / (d * d);
  op.i_l = i_avg / d;
  op.v_o = i_avg * p.r / d;
  op.d = d;
  return op;
}

OperatingPoint steady_state(const ReceiverParams& p) {
  return steady_state_at(p, p.d_nom);
}

AvgState averaged_derivatives(const ReceiverParams& p, const AvgState& x,
                              double d) {
  validate(p);
  if (!std::isfinite(d) || d < 0.0 || d > 1.0)
    throw std::invalid_argument("duty must lie in [0, 1]");
  AvgState dx;
  dx.v_dc = (2.0 * p.i_ls_amp / std::numbers::pi - d * x.i_l) / p.c_dc;
  dx.i_l = (d * x.v_dc - x.v_o) / p.l;
  dx.v_o = (x.i_l - x.v_o / p.r) / p.c_o;
  return dx;
}

SmallSignalSS linearize(const ReceiverParams& p) {
  SmallSignalSS ss;
  ss.op = steady_state(p);
  const double d = p.d_nom;
  ss.a_matrix << 0.0, -d / p.c_dc, 0.0,
                 d / p.l, 0.0, -1.0 / p.l,
                 0.0, 1.0 / p.c_o, -1.0 / (p.r * p.c_o);
  ss.b_vector << -ss.op.i_l / p.c_dc, ss.op.v_dc / p.l, 0.0;
  return ss;
}

std::array<std::complex<double>, 3> eigenvalues(const SmallSignalSS& ss) {
  Eigen::EigenSolver<Eigen::Matrix3d> es(ss.a_matrix);
  std::array<std::complex<double>, 3> ev;
  for (int i = 0; i < 3; ++i) ev[i] = es.eigenvalues()(i);
  std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return ev;
}

}  // namespace wptrx
