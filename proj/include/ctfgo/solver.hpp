#pragma once

#include <Eigen/SparseCore>
#include <utility>

#include "ctfgo/factor_graph.hpp"

namespace ctfgo {

struct SolveOptions {
  int max_iterations = 100;
  double rel_cost_tol = 1e-9;
  double step_tol = 1e-9;
  double lambda_init = 1e-4;
  double lambda_up = 10.0;
  double lambda_down = 3.0;
  double lambda_cap = 1e12;
  int max_mixture_rounds = 10;  // discrete reassignment rounds for GMM noise
};

struct SolveReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;
  double wall_time = 0.0;  // seconds
  std::vector<double> per_iteration_costs;
  int mixture_rounds = 1;
};

/// Per-factor GMM component choice; -1 where not applicable. The discrete
/// half of the discrete-continuous scheme: fixed during one LM run,
/// re-selected between runs.
using MixtureAssignment = std::vector<int>;

MixtureAssignment select_assignment(const FactorGraph& graph,
                                    const std::vector<StateKnot>& estimate);

struct LinearizedSystem {
  Eigen::SparseMatrix<double> jacobian;  // rows x 8*num_knots, whitened
  Eigen::VectorXd residual;              // whitened
  double offset = 0.0;                   // sum of mixture normalization terms
};

/// Whitened residuals and sparse Jacobian of the quadratic model
/// 0.5 ||J dx + r||^2 (+ offset). GMM factors use `assignment` when given,
/// otherwise their currently most probable component.
LinearizedSystem linearize(const FactorGraph& graph,
                           const std::vector<StateKnot>& estimate,
                           const MixtureAssignment* assignment = nullptr);

/// Noise-model cost of the raw residuals: quadratic for Gaussian factors,
/// kernel cost for M-estimators, negative log mixture density for GMM.
double evaluate_cost(const FactorGraph& graph,
                     const std::vector<StateKnot>& estimate);

/// Solver objective: like evaluate_cost but GMM factors use the max-mixture
/// surrogate 0.5 w^2 + offset under the given assignment.
double evaluate_cost(const FactorGraph& graph,
                     const std::vector<StateKnot>& estimate,
                     const MixtureAssignment& assignment);

/// Levenberg-Marquardt batch solve with adaptive damping; accepted steps
/// never increase the objective. GMM graphs alternate LM runs with
/// component reassignment until assignments are stable.
std::pair<std::vector<StateKnot>, SolveReport> solve(
    const FactorGraph& graph, std::vector<StateKnot> initial,
    const SolveOptions& options = {});

}  // namespace ctfgo
