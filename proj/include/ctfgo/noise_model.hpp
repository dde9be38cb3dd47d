#pragma once

#include "ctfgo/gmm_model.hpp"

namespace ctfgo {

enum class Kernel { huber, cauchy };

/// IRLS weight in (0,1] for a whitened residual r at kernel scale c.
double mestimator_weight(Kernel kernel, double c, double r);

/// Robust cost rho(r) matching the weight function above.
double mestimator_cost(Kernel kernel, double c, double r);

/// Negative log mixture density -log sum_k w_k N(r; mu_k, var_k).
double gmm_nll(const GmmModel& gmm, double r);

/// Discrete max-mixture choice for one residual.
struct MixtureSelection {
  int component = 0;
  double quadratic_weight = 1.0;  // 1 / var_k
  double offset = 0.0;            // -log(w_k / sqrt(2 pi var_k))
};

/// Most probable component: argmax_k w_k N(r; mu_k, var_k), ties to the
/// lowest index.
MixtureSelection select_component(const GmmModel& gmm, double r);

/// Quadratic surrogate for the selected component. The solver minimizes
/// 0.5 whitened^2 + offset per residual; offsets make costs comparable
/// across discrete assignments but carry no gradient.
struct Surrogate {
  double whitened = 0.0;  // (r - mu_k) / sigma_k
  double offset = 0.0;
};

Surrogate surrogate_residual(const MixtureSelection& sel, const GmmModel& gmm,
                             double r);

/// Pseudorange noise treatment, one of three interchangeable kinds.
struct NoiseModel {
  enum class Kind { gaussian, m_estimator, gmm };

  Kind kind = Kind::gaussian;
  double sigma = 1.0;              // gaussian / m_estimator whitening sigma
  Kernel kernel = Kernel::cauchy;  // m_estimator only
  double scale = 1.0;              // m_estimator kernel scale
  GmmModel gmm;                    // gmm only
  bool elevation_weighting = false;  // sigma(el) = sigma / sin(el)

  static NoiseModel Gaussian(double sigma) {
    NoiseModel n;
    n.kind = Kind::gaussian;
    n.sigma = sigma;
    return n;
  }
  static NoiseModel MEstimator(Kernel kernel, double scale, double sigma) {
    NoiseModel n;
    n.kind = Kind::m_estimator;
    n.kernel = kernel;
    n.scale = scale;
    n.sigma = sigma;
    return n;
  }
  static NoiseModel Gmm(GmmModel gmm) {
    NoiseModel n;
    n.kind = Kind::gmm;
    n.gmm = std::move(gmm);
    return n;
  }
};

}  // namespace ctfgo
