#pragma once

#include "ctfgo/state.hpp"

namespace ctfgo {

/// Constant-velocity transition over dt. Block diagonal with [[1,dt],[0,1]]
/// per position/velocity axis pair and for the clock pair.
Mat8 transition(double dt);

/// White-noise-on-acceleration process covariance over dt > 0. Per 2x2 block
/// with PSD q: [[q dt^3/3, q dt^2/2],[q dt^2/2, q dt]].
Mat8 process_cov(double dt, const GpHyperParams& hp);

/// Symmetric square root of cov^-1 with an eigenvalue floor, so the whitened
/// residual W e has unit covariance when e ~ N(0, cov).
Mat8 inverse_sqrt(const Mat8& cov);

/// Interpolation matrices binding an off-knot query time to its bracketing
/// knots i and j: x(t_q) = lambda x_i + psi x_j.
struct GpInterpolant {
  int i = 0;
  int j = 0;
  double tau = 0.0;
  Mat8 lambda = Mat8::Identity();
  Mat8 psi = Mat8::Zero();
};

GpInterpolant make_interpolant(int i, int j, double t_i, double t_j, double t_q,
                               const GpHyperParams& hp);

/// Posterior mean of the GP at t_q conditioned on the bracketing knots.
StateKnot interpolate(const StateKnot& knot_i, const StateKnot& knot_j,
                      double t_q, const GpHyperParams& hp);

struct MotionPrior {
  Vec8 residual;   // x_j - Phi(dt) x_i
  Mat8 info_sqrt;  // W with W^T W = Q(dt)^-1
};

/// Binary GP prior factor between consecutive knots.
MotionPrior motion_prior_residual(const StateKnot& knot_i,
                                  const StateKnot& knot_j,
                                  const GpHyperParams& hp);

}  // namespace ctfgo
