#include "ctfgo/gp_model.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <random>

using namespace ctfgo;

namespace {

// Independent oracle: numerically integrate the controllability Gramian
// int_0^dt Phi(dt - s) L q L^T Phi(dt - s)^T ds per 2x2 block with
// L = [0, 1]^T, using composite Simpson quadrature.
Eigen::Matrix2d block_cov_quadrature(double dt, double q) {
  const int n = 2000;  // Simpson panels
  const double h = dt / n;
  auto integrand = [&](double s) {
    const double u = dt - s;
    Eigen::Matrix2d m;
    m << u * u, u, u, 1.0;
    return (q * m).eval();
  };
  Eigen::Matrix2d acc = integrand(0.0) + integrand(dt);
  for (int i = 1; i < n; ++i)
    acc += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
  return acc * h / 3.0;
}

StateKnot random_knot(std::mt19937& gen, double t) {
  std::normal_distribution<double> dist;
  StateKnot k;
  k.t = t;
  k.p = 100.0 * Vec3(dist(gen), dist(gen), dist(gen));
  k.v = 5.0 * Vec3(dist(gen), dist(gen), dist(gen));
  k.b = 50.0 * dist(gen);
  k.d = 2.0 * dist(gen);
  return k;
}

}  // namespace

TEST(Transition, IdentityAtZeroDt) {
  EXPECT_TRUE(transition(0.0).isApprox(Mat8::Identity(), 1e-15));
}

TEST(Transition, UnitDtBlock) {
  const Mat8 phi = transition(1.0);
  for (int blk = 0; blk < 4; ++blk) {
    EXPECT_DOUBLE_EQ(phi(2 * blk, 2 * blk), 1.0);
    EXPECT_DOUBLE_EQ(phi(2 * blk, 2 * blk + 1), 1.0);
    EXPECT_DOUBLE_EQ(phi(2 * blk + 1, 2 * blk), 0.0);
    EXPECT_DOUBLE_EQ(phi(2 * blk + 1, 2 * blk + 1), 1.0);
  }
}

TEST(Transition, Semigroup) {
  EXPECT_TRUE((transition(0.5) * transition(0.5)).isApprox(transition(1.0), 1e-12));
  EXPECT_TRUE((transition(0.3) * transition(1.9)).isApprox(transition(2.2), 1e-12));
}

TEST(Transition, NegativeDtRejected) {
  EXPECT_THROW(transition(-0.1), std::invalid_argument);
}

TEST(ProcessCov, MatchesQuadratureOracleUnit) {
  GpHyperParams hp;
  hp.qc_pv = Vec3::Ones();
  hp.qc_clk = 1.0;
  const Mat8 q = process_cov(1.0, hp);
  const Eigen::Matrix2d oracle = block_cov_quadrature(1.0, 1.0);
  Eigen::Matrix2d expected;
  expected << 1.0 / 3.0, 0.5, 0.5, 1.0;
  for (int blk = 0; blk < 4; ++blk) {
    EXPECT_TRUE((q.block<2, 2>(2 * blk, 2 * blk).isApprox(expected, 1e-12)));
    EXPECT_TRUE((q.block<2, 2>(2 * blk, 2 * blk).isApprox(oracle, 1e-9)));
  }
}

TEST(ProcessCov, MatchesQuadratureOracleScaled) {
  GpHyperParams hp;
  hp.qc_pv = Vec3::Constant(0.5);
  hp.qc_clk = 0.5;
  const Mat8 q = process_cov(2.0, hp);
  const Eigen::Matrix2d oracle = block_cov_quadrature(2.0, 0.5);
  Eigen::Matrix2d expected;
  expected << 4.0 / 3.0, 1.0, 1.0, 1.0;
  EXPECT_TRUE((q.block<2, 2>(0, 0).isApprox(expected, 1e-12)));
  EXPECT_TRUE((q.block<2, 2>(0, 0).isApprox(oracle, 1e-9)));
}

TEST(ProcessCov, BlockDeterminantPositive) {
  GpHyperParams hp;
  for (double dt : {1e-3, 0.1, 1.0, 4.5, 10.0}) {
    const Mat8 q = process_cov(dt, hp);
    for (int blk = 0; blk < 4; ++blk) {
      const double qc = hp.q_of_block(blk);
      const double det = q.block<2, 2>(2 * blk, 2 * blk).determinant();
      EXPECT_NEAR(det, qc * qc * std::pow(dt, 4) / 12.0, 1e-9 * det);
      EXPECT_GT(det, 0.0);
    }
  }
}

TEST(ProcessCov, SymmetricPositiveDefinite) {
  GpHyperParams hp;
  hp.qc_pv = Vec3(2.0, 0.3, 1.7);
  hp.qc_clk = 0.05;
  for (double dt : {1e-3, 1e-2, 0.1, 1.0, 10.0}) {
    const Mat8 q = process_cov(dt, hp);
    EXPECT_TRUE(q.isApprox(q.transpose(), 1e-14));
    Eigen::SelfAdjointEigenSolver<Mat8> eig(q);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(ProcessCov, NonPositiveDtRejected) {
  GpHyperParams hp;
  EXPECT_THROW(process_cov(0.0, hp), std::invalid_argument);
  EXPECT_THROW(process_cov(-1.0, hp), std::invalid_argument);
}

TEST(Interpolant, BoundaryConditions) {
  GpHyperParams hp;
  const auto at_i = make_interpolant(0, 1, 2.0, 5.0, 2.0, hp);
  EXPECT_TRUE(at_i.lambda.isApprox(Mat8::Identity(), 1e-12));
  EXPECT_LT(at_i.psi.norm(), 1e-12);

  const auto at_j = make_interpolant(0, 1, 2.0, 5.0, 5.0, hp);
  EXPECT_LT(at_j.lambda.norm(), 1e-10);
  EXPECT_TRUE(at_j.psi.isApprox(Mat8::Identity(), 1e-10));
}

TEST(Interpolant, CombinationIdentity) {
  // lambda(tau) + psi(tau) Phi(dt) = Phi(tau) for all tau in [0, dt]
  GpHyperParams hp;
  hp.qc_pv = Vec3(0.7, 1.3, 2.1);
  hp.qc_clk = 0.2;
  const double dt = 2.5;
  for (int i = 0; i <= 20; ++i) {
    const double tau = dt * i / 20.0;
    const auto gi = make_interpolant(0, 1, 0.0, dt, tau, hp);
    const Mat8 lhs = gi.lambda + gi.psi * transition(dt);
    EXPECT_TRUE(lhs.isApprox(transition(tau), 1e-10)) << "tau=" << tau;
  }
}

TEST(Interpolate, ExactAtEndpointsRandomized) {
  std::mt19937 gen(1234);
  GpHyperParams hp;
  for (int trial = 0; trial < 1000; ++trial) {
    const StateKnot ki = random_knot(gen, 0.0);
    StateKnot kj = random_knot(gen, 0.0);
    kj.t = 0.5 + 3.0 * std::uniform_real_distribution<double>(0, 1)(gen);
    const StateKnot at_i = interpolate(ki, kj, ki.t, hp);
    const StateKnot at_j = interpolate(ki, kj, kj.t, hp);
    EXPECT_LT((at_i.vector() - ki.vector()).norm(), 1e-10);
    EXPECT_LT((at_j.vector() - kj.vector()).norm(), 1e-10);
  }
}

TEST(Interpolate, ConstantVelocityMidpoint) {
  GpHyperParams hp;
  StateKnot ki;
  ki.t = 10.0;
  ki.p = Vec3(1.0, 2.0, 3.0);
  ki.v = Vec3(2.0, -1.0, 0.5);
  ki.b = 7.0;
  ki.d = 0.25;
  StateKnot kj = ki;
  kj.t = 14.0;
  kj.p = ki.p + ki.v * 4.0;
  kj.b = ki.b + ki.d * 4.0;

  const StateKnot mid = interpolate(ki, kj, 12.0, hp);
  EXPECT_LT((mid.p - 0.5 * (ki.p + kj.p)).norm(), 1e-9);
  EXPECT_LT((mid.v - ki.v).norm(), 1e-9);
  EXPECT_NEAR(mid.b, ki.b + ki.d * 2.0, 1e-9);
  EXPECT_NEAR(mid.d, ki.d, 1e-9);
}

TEST(Interpolate, RejectsOutOfBracketAndDegenerate) {
  GpHyperParams hp;
  StateKnot ki, kj;
  ki.t = 0.0;
  kj.t = 1.0;
  EXPECT_THROW(interpolate(ki, kj, -0.1, hp), std::invalid_argument);
  EXPECT_THROW(interpolate(ki, kj, 1.1, hp), std::invalid_argument);
  kj.t = 0.0;
  EXPECT_THROW(interpolate(ki, kj, 0.0, hp), std::invalid_argument);
}

TEST(MotionPrior, ZeroResidualOnPropagatedState) {
  GpHyperParams hp;
  std::mt19937 gen(77);
  const StateKnot ki = random_knot(gen, 1.0);
  const double dt = 2.0;
  const StateKnot kj =
      StateKnot::from_vector(ki.t + dt, transition(dt) * ki.vector());
  const MotionPrior mp = motion_prior_residual(ki, kj, hp);
  EXPECT_LT(mp.residual.norm(), 1e-12);
}

TEST(MotionPrior, StationaryKnots) {
  GpHyperParams hp;
  StateKnot ki;
  ki.t = 0.0;
  ki.p = Vec3(5.0, 6.0, 7.0);
  StateKnot kj = ki;
  kj.t = 1.0;
  const MotionPrior mp = motion_prior_residual(ki, kj, hp);
  EXPECT_LT(mp.residual.norm(), 1e-12);
}

TEST(MotionPrior, PositionOffsetAppearsInResidual) {
  GpHyperParams hp;
  StateKnot ki;
  ki.t = 0.0;
  ki.v = Vec3(1.0, 0.0, 0.0);
  StateKnot kj = StateKnot::from_vector(1.0, transition(1.0) * ki.vector());
  const Vec3 delta(0.3, -0.2, 0.9);
  kj.p += delta;
  const MotionPrior mp = motion_prior_residual(ki, kj, hp);
  EXPECT_NEAR(mp.residual(0), delta.x(), 1e-12);
  EXPECT_NEAR(mp.residual(2), delta.y(), 1e-12);
  EXPECT_NEAR(mp.residual(4), delta.z(), 1e-12);
}

TEST(MotionPrior, InfoSqrtSquaresToInverseCov) {
  GpHyperParams hp;
  hp.qc_pv = Vec3(0.4, 1.0, 3.0);
  StateKnot ki, kj;
  ki.t = 0.0;
  kj.t = 1.7;
  const MotionPrior mp = motion_prior_residual(ki, kj, hp);
  const Mat8 q = process_cov(1.7, hp);
  const Mat8 should_be_identity = mp.info_sqrt * q * mp.info_sqrt.transpose();
  EXPECT_TRUE(should_be_identity.isApprox(Mat8::Identity(), 1e-8));
}

TEST(MotionPrior, DegenerateIntervalRejected) {
  GpHyperParams hp;
  StateKnot ki, kj;
  ki.t = 1.0;
  kj.t = 1.0;
  EXPECT_THROW(motion_prior_residual(ki, kj, hp), std::invalid_argument);
}
