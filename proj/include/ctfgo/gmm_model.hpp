#pragma once

#include <vector>

namespace ctfgo {

/// One component of a 1-D Gaussian mixture together with its variational
/// posterior hyperparameters (Dirichlet alpha; Normal-Gamma beta, m, a, rte).
struct GmmComponent {
  double w = 1.0;
  double mu = 0.0;    // meters
  double var = 1.0;   // m^2
  double alpha = 1.0;
  double beta = 1.0;
  double m = 0.0;
  double a = 2.0;
  double rte = 2.0;
};

struct GmmModel {
  std::vector<GmmComponent> comps;

  int K() const { return static_cast<int>(comps.size()); }

  static GmmModel single(double mu, double var) {
    GmmModel g;
    g.comps.push_back(GmmComponent{1.0, mu, var, 1.0, 1.0, mu, 2.0, var});
    return g;
  }

  bool valid(double weight_tol = 1e-9) const {
    if (comps.empty()) return false;
    double wsum = 0.0;
    for (const auto& c : comps) {
      if (!(c.var > 0.0)) return false;
      wsum += c.w;
    }
    return std::abs(wsum - 1.0) <= weight_tol;
  }
};

}  // namespace ctfgo
