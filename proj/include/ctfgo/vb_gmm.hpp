#pragma once

#include <vector>

#include "ctfgo/gmm_model.hpp"

namespace ctfgo {

/// Priors of the mean-field variational mixture: Dirichlet concentration for
/// the weights and a Normal-Gamma prior per component.
struct VbPrior {
  double alpha0 = 1.0;  // Dirichlet concentration
  double beta0 = 1.0;   // mean-precision scale
  double m0 = 0.0;      // prior mean, meters
  double a0 = 2.0;      // Gamma shape
  double rte0 = 2.0;    // Gamma rate

  bool valid() const {
    return alpha0 > 0.0 && beta0 > 0.0 && a0 > 0.0 && rte0 > 0.0;
  }
};

struct VbFitResult {
  GmmModel model;
  std::vector<double> elbo_trace;
  int iterations = 0;
};

/// Mean-field VB for a finite 1-D Gaussian mixture. Responsibilities are
/// seeded from the (k+1/2)/K sample quantiles with a deterministic
/// index tilt that breaks exact symmetry; everything is reproducible from
/// the sample window alone. Iterates until the ELBO gain drops below
/// elbo_tol or max_iters. Requires at least 2*k_max samples.
VbFitResult vb_fit(const std::vector<double>& samples, const VbPrior& prior,
                   int k_max, int max_iters, double elbo_tol = 1e-6);

/// Drops components below the weight floor and renormalizes; never removes
/// the last (or the single dominant) component.
GmmModel prune(const GmmModel& gmm, double weight_floor);

/// Distribution-shift elimination: re-centers all means so the dominant
/// component (largest weight; ties to smaller variance, then lower index)
/// sits at zero.
GmmModel eliminate_shift(const GmmModel& gmm);

/// Average sample log likelihood, for comparing refit candidates.
double mean_log_likelihood(const GmmModel& gmm,
                           const std::vector<double>& samples);

}  // namespace ctfgo
