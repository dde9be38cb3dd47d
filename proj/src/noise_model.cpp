#include "ctfgo/noise_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctfgo {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;

double log_component_density(const GmmComponent& c, double r) {
  const double z = (r - c.mu) * (r - c.mu) / c.var;
  return std::log(c.w) - 0.5 * (kLogTwoPi + std::log(c.var)) - 0.5 * z;
}
}  // namespace

double mestimator_weight(Kernel kernel, double c, double r) {
  if (c <= 0.0) throw std::invalid_argument("mestimator_weight: scale must be > 0");
  const double a = std::fabs(r);
  switch (kernel) {
    case Kernel::cauchy: {
      const double e = a / c;
      return 1.0 / (1.0 + e * e);
    }
    case Kernel::huber:
      return a <= c ? 1.0 : c / a;
  }
  return 1.0;
}

double mestimator_cost(Kernel kernel, double c, double r) {
  if (c <= 0.0) throw std::invalid_argument("mestimator_cost: scale must be > 0");
  const double a = std::fabs(r);
  switch (kernel) {
    case Kernel::cauchy: {
      const double e = a / c;
      return 0.5 * c * c * std::log1p(e * e);
    }
    case Kernel::huber:
      return a <= c ? 0.5 * r * r : c * (a - 0.5 * c);
  }
  return 0.5 * r * r;
}

double gmm_nll(const GmmModel& gmm, double r) {
  if (gmm.comps.empty()) throw std::invalid_argument("gmm_nll: empty mixture");
  double wsum = 0.0;
  for (const auto& c : gmm.comps) {
    if (!(c.var > 0.0)) throw std::invalid_argument("gmm_nll: variance must be > 0");
    wsum += c.w;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument("gmm_nll: weights must sum to 1");

  // log-sum-exp over component log densities
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& c : gmm.comps) mx = std::max(mx, log_component_density(c, r));
  double acc = 0.0;
  for (const auto& c : gmm.comps) acc += std::exp(log_component_density(c, r) - mx);
  return -(mx + std::log(acc));
}

MixtureSelection select_component(const GmmModel& gmm, double r) {
  if (gmm.comps.empty())
    throw std::invalid_argument("select_component: empty mixture");
  int best = 0;
  double best_log = log_component_density(gmm.comps[0], r);
  for (int k = 1; k < gmm.K(); ++k) {
    const double lk = log_component_density(gmm.comps[k], r);
    if (lk > best_log) {
      best = k;
      best_log = lk;
    }
  }
  const GmmComponent& c = gmm.comps[best];
  MixtureSelection sel;
  sel.component = best;
  sel.quadratic_weight = 1.0 / c.var;
  sel.offset = -std::log(c.w) + 0.5 * (kLogTwoPi + std::log(c.var));
  return sel;
}

Surrogate surrogate_residual(const MixtureSelection& sel, const GmmModel& gmm,
                             double r) {
  if (sel.component < 0 || sel.component >= gmm.K())
    throw std::invalid_argument("surrogate_residual: selection out of range");
  const GmmComponent& c = gmm.comps[sel.component];
  Surrogate s;
  s.whitened = (r - c.mu) / std::sqrt(c.var);
  s.offset = -std::log(c.w) + 0.5 * (kLogTwoPi + std::log(c.var));
  return s;
}

}  // namespace ctfgo
