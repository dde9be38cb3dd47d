#include "ctfgo/measurements.hpp"

#include <stdexcept>

namespace ctfgo {

namespace {
Vec3 line_of_sight(const StateKnot& state, const SatObservation& obs) {
  const Vec3 diff = obs.sat_pos - state.p;
  const double range = diff.norm();
  if (range <= 1.0)
    throw std::domain_error("pseudorange: receiver within 1 m of satellite");
  return diff / range;
}
}  // namespace

double pseudorange_residual(const StateKnot& state, const SatObservation& obs) {
  const Vec3 diff = obs.sat_pos - state.p;
  const double range = diff.norm();
  if (range <= 1.0)
    throw std::domain_error("pseudorange: receiver within 1 m of satellite");
  return obs.rho - (range + state.b);
}

RowVec8 pseudorange_jacobian(const StateKnot& state, const SatObservation& obs) {
  const Vec3 u = line_of_sight(state, obs);
  RowVec8 jac = RowVec8::Zero();
  jac(0) = u.x();  // d e / d px
  jac(2) = u.y();
  jac(4) = u.z();
  jac(6) = -1.0;   // d e / d b
  return jac;
}

Vec3 odometry_residual(const StateKnot& state_i, const StateKnot& state_j,
                       const OdometryMeasurement& odo) {
  if ((odo.sigma.array() <= 0.0).any())
    throw std::invalid_argument("odometry: sigma must be > 0");
  const Vec3 e = (state_j.p - state_i.p) - odo.delta_p;
  return e.cwiseQuotient(odo.sigma);
}

}  // namespace ctfgo
