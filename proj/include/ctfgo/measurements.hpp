#pragma once

#include <optional>

#include "ctfgo/state.hpp"

namespace ctfgo {

/// One satellite's epoch data. los_truth is only populated by the simulator.
struct SatObservation {
  int sat_id = 0;
  Vec3 sat_pos = Vec3::Zero();  // meters, world frame
  double rho = 0.0;             // pseudorange, meters
  double cn0 = 0.0;             // dB-Hz
  double elevation = 0.0;       // rad, [0, pi/2]
  double azimuth = 0.0;         // rad, [0, 2 pi)
  std::optional<bool> los_truth;
  double t = 0.0;
};

/// World-frame displacement odometry over [t_i, t_j] with per-axis sigma.
struct OdometryMeasurement {
  double t_i = 0.0;
  double t_j = 0.0;
  Vec3 delta_p = Vec3::Zero();
  Vec3 sigma = Vec3::Ones();
};

/// Raw pseudorange residual e = rho - (||sat_pos - p|| + b), meters.
double pseudorange_residual(const StateKnot& state, const SatObservation& obs);

/// Row of derivatives of the raw residual w.r.t. the stacked 8-state.
RowVec8 pseudorange_jacobian(const StateKnot& state, const SatObservation& obs);

/// Whitened odometry residual: ((p_j - p_i) - delta_p) / sigma per axis.
Vec3 odometry_residual(const StateKnot& state_i, const StateKnot& state_j,
                       const OdometryMeasurement& odo);

}  // namespace ctfgo
