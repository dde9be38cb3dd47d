#pragma once

#include <Eigen/Core>

namespace ctfgo {

using Vec3 = Eigen::Vector3d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using RowVec8 = Eigen::Matrix<double, 1, 8>;

/// Trajectory state at one knot time: 3-D position and velocity plus the
/// receiver clock bias (meters) and clock drift (m/s).
struct StateKnot {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  double b = 0.0;
  double d = 0.0;

  /// Stacked 8-vector. Position/velocity are interleaved per axis so the
  /// constant-velocity transition is 2x2 block diagonal:
  /// [px vx py vy pz vz b d].
  Vec8 vector() const {
    Vec8 x;
    x << p.x(), v.x(), p.y(), v.y(), p.z(), v.z(), b, d;
    return x;
  }

  static StateKnot from_vector(double t, const Vec8& x) {
    StateKnot k;
    k.t = t;
    k.p = Vec3(x(0), x(2), x(4));
    k.v = Vec3(x(1), x(3), x(5));
    k.b = x(6);
    k.d = x(7);
    return k;
  }

  bool finite() const { return vector().allFinite() && std::isfinite(t); }
};

/// Power spectral densities of the white-noise-on-acceleration prior,
/// per position axis plus the clock-drift channel.
struct GpHyperParams {
  Vec3 qc_pv = Vec3(1.0, 1.0, 1.0);  // m^2/s^3
  double qc_clk = 0.1;               // m^2/s^3

  bool valid() const { return (qc_pv.array() > 0.0).all() && qc_clk > 0.0; }

  /// PSD of block pair `blk` in {0,1,2,3}; block 3 is the clock pair.
  double q_of_block(int blk) const { return blk < 3 ? qc_pv(blk) : qc_clk; }
};

}  // namespace ctfgo
