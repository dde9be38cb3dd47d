#include "ctfgo/gp_model.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace ctfgo {

Mat8 transition(double dt) {
  if (dt < 0.0) throw std::invalid_argument("transition: dt must be >= 0");
  Mat8 phi = Mat8::Identity();
  for (int blk = 0; blk < 4; ++blk) phi(2 * blk, 2 * blk + 1) = dt;
  return phi;
}

Mat8 process_cov(double dt, const GpHyperParams& hp) {
  if (dt <= 0.0) throw std::invalid_argument("process_cov: dt must be > 0");
  if (!hp.valid()) throw std::invalid_argument("process_cov: PSDs must be > 0");
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  Mat8 q = Mat8::Zero();
  for (int blk = 0; blk < 4; ++blk) {
    const double qc = hp.q_of_block(blk);
    const int r = 2 * blk;
    q(r, r) = qc * dt3 / 3.0;
    q(r, r + 1) = qc * dt2 / 2.0;
    q(r + 1, r) = qc * dt2 / 2.0;
    q(r + 1, r + 1) = qc * dt;
  }
  return q;
}

Mat8 inverse_sqrt(const Mat8& cov) {
  Eigen::SelfAdjointEigenSolver<Mat8> eig(cov);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("inverse_sqrt: eigendecomposition failed");
  Vec8 inv_sqrt_ev;
  for (int k = 0; k < 8; ++k) {
    const double ev = std::max(eig.eigenvalues()(k), 1e-12);
    inv_sqrt_ev(k) = 1.0 / std::sqrt(ev);
  }
  return eig.eigenvectors() * inv_sqrt_ev.asDiagonal() *
         eig.eigenvectors().transpose();
}

GpInterpolant make_interpolant(int i, int j, double t_i, double t_j,
                               double t_q, const GpHyperParams& hp) {
  if (t_j <= t_i) throw std::invalid_argument("make_interpolant: degenerate interval");
  if (t_q < t_i || t_q > t_j)
    throw std::invalid_argument("make_interpolant: query time outside bracket");
  const double dt = t_j - t_i;
  const double tau = t_q - t_i;

  GpInterpolant out;
  out.i = i;
  out.j = j;
  out.tau = tau;
  if (tau == 0.0) return out;  // lambda = I, psi = 0

  // Per-block closed form: psi = Q(tau) Phi(dt-tau)^T Q(dt)^-1,
  // lambda = Phi(tau) - psi Phi(dt).
  const Mat8 q_tau = process_cov(tau, hp);
  const Mat8 phi_rem = transition(dt - tau);
  const Mat8 phi_dt = transition(dt);
  const Mat8 phi_tau = transition(tau);

  Mat8 psi = Mat8::Zero();
  for (int blk = 0; blk < 4; ++blk) {
    const int r = 2 * blk;
    const Eigen::Matrix2d qd = process_cov(dt, hp).block<2, 2>(r, r);
    psi.block<2, 2>(r, r) = q_tau.block<2, 2>(r, r) *
                            phi_rem.block<2, 2>(r, r).transpose() *
                            qd.inverse();
  }
  out.psi = psi;
  out.lambda = phi_tau - psi * phi_dt;
  return out;
}

StateKnot interpolate(const StateKnot& knot_i, const StateKnot& knot_j,
                      double t_q, const GpHyperParams& hp) {
  if (knot_j.t <= knot_i.t)
    throw std::invalid_argument("interpolate: degenerate interval");
  if (t_q < knot_i.t || t_q > knot_j.t)
    throw std::invalid_argument("interpolate: query time outside bracket");
  const GpInterpolant gi =
      make_interpolant(0, 1, knot_i.t, knot_j.t, t_q, hp);
  const Vec8 x = gi.lambda * knot_i.vector() + gi.psi * knot_j.vector();
  return StateKnot::from_vector(t_q, x);
}

MotionPrior motion_prior_residual(const StateKnot& knot_i,
                                  const StateKnot& knot_j,
                                  const GpHyperParams& hp) {
  const double dt = knot_j.t - knot_i.t;
  if (dt <= 0.0)
    throw std::invalid_argument("motion_prior_residual: degenerate interval");
  MotionPrior out;
  out.residual = knot_j.vector() - transition(dt) * knot_i.vector();
  out.info_sqrt = inverse_sqrt(process_cov(dt, hp));
  return out;
}

}  // namespace ctfgo
