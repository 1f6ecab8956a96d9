#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "wptrx/receiver_params.hpp"

namespace wptrx {

/// Cycle-averaged state of the converter.
struct AvgState {
  double v_dc = 0.0;  // dc-link voltage, V
  double i_l = 0.0;   // inductor current, A
  double v_o = 0.0;   // output voltage, V
};

/// Equilibrium of the averaged model at a fixed duty.
struct OperatingPoint {
  double v_dc = 0.0;
  double i_l = 0.0;
  double v_o = 0.0;
  double d = 0.0;
};

/// Small-signal model x' = A x + B d~ around an operating point.
/// State order: (v_dc~, i_l~, v_o~).
struct SmallSignalSS {
  Eigen::Matrix3d a_matrix;
  Eigen::Vector3d b_vector;
  OperatingPoint op;
};

/// Averaged equilibrium at duty d in (0, 1]; d = 1 is the boundary case with
/// the rectifier loaded straight through the inductor.
OperatingPoint steady_state_at(const ReceiverParams& p, double d);

/// Equilibrium at the nominal duty.
OperatingPoint steady_state(const ReceiverParams& p);

/// Right-hand side of the averaged model at duty d in [0, 1].
/// The dc-link sees the mean rectified current 2*i_ls_amp/pi minus d*i_l.
AvgState averaged_derivatives(const ReceiverParams& p, const AvgState& x,
                              double d);

/// Linearization around the nominal operating point.
SmallSignalSS linearize(const ReceiverParams& p);

/// Eigenvalues of the state matrix, sorted by (real, imag).
std::array<std::complex<double>, 3> eigenvalues(const SmallSignalSS& ss);

}  // namespace wptrx
