#include "ctfgo/vb_gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>

#include "ctfgo/noise_model.hpp"

namespace ctfgo {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

using boost::math::digamma;

double lgamma_(double x) { return std::lgamma(x); }

struct VbState {
  std::vector<double> alpha, beta, m, a, rte;  // per component
  std::vector<double> nk, xbar, sk;            // responsibility statistics
};

// Responsibility-weighted statistics of the samples.
void accumulate_stats(const std::vector<double>& x,
                      const std::vector<std::vector<double>>& resp,
                      VbState& st) {
  const int k_max = static_cast<int>(st.alpha.size());
  const int n = static_cast<int>(x.size());
  st.nk.assign(k_max, 0.0);
  st.xbar.assign(k_max, 0.0);
  st.sk.assign(k_max, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < k_max; ++k) {
      st.nk[k] += resp[i][k];
      st.xbar[k] += resp[i][k] * x[i];
    }
  for (int k = 0; k < k_max; ++k)
    st.xbar[k] = st.nk[k] > 1e-12 ? st.xbar[k] / st.nk[k] : 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < k_max; ++k) {
      const double d = x[i] - st.xbar[k];
      st.sk[k] += resp[i][k] * d * d;
    }
  for (int k = 0; k < k_max; ++k)
    st.sk[k] = st.nk[k] > 1e-12 ? st.sk[k] / st.nk[k] : 0.0;
}

void m_step(const VbPrior& prior, VbState& st) {
  const int k_max = static_cast<int>(st.alpha.size());
  for (int k = 0; k < k_max; ++k) {
    const double nk = st.nk[k];
    st.alpha[k] = prior.alpha0 + nk;
    st.beta[k] = prior.beta0 + nk;
    st.m[k] = (prior.beta0 * prior.m0 + nk * st.xbar[k]) / st.beta[k];
    st.a[k] = prior.a0 + 0.5 * nk;
    st.rte[k] = prior.rte0 +
                0.5 * (nk * st.sk[k] + prior.beta0 * nk *
                                           (st.xbar[k] - prior.m0) *
                                           (st.xbar[k] - prior.m0) /
                                           (prior.beta0 + nk));
  }
}

// Expected log weights / log precisions under the current posterior.
void expectations(const VbState& st, std::vector<double>& eln_pi,
                  std::vector<double>& eln_lam) {
  const int k_max = static_cast<int>(st.alpha.size());
  const double alpha_hat = std::accumulate(st.alpha.begin(), st.alpha.end(), 0.0);
  eln_pi.resize(k_max);
  eln_lam.resize(k_max);
  for (int k = 0; k < k_max; ++k) {
    eln_pi[k] = digamma(st.alpha[k]) - digamma(alpha_hat);
    eln_lam[k] = digamma(st.a[k]) - std::log(st.rte[k]);
  }
}

void e_step(const std::vector<double>& x, const VbState& st,
            std::vector<std::vector<double>>& resp) {
  const int k_max = static_cast<int>(st.alpha.size());
  std::vector<double> eln_pi, eln_lam;
  expectations(st, eln_pi, eln_lam);
  std::vector<double> logrho(k_max);
  for (size_t i = 0; i < x.size(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_max; ++k) {
      const double d = x[i] - st.m[k];
      const double equad = 1.0 / st.beta[k] + st.a[k] / st.rte[k] * d * d;
      logrho[k] = eln_pi[k] + 0.5 * eln_lam[k] - 0.5 * kLogTwoPi - 0.5 * equad;
      mx = std::max(mx, logrho[k]);
    }
    double denom = 0.0;
    for (int k = 0; k < k_max; ++k) denom += std::exp(logrho[k] - mx);
    const double lse = mx + std::log(denom);
    for (int k = 0; k < k_max; ++k) resp[i][k] = std::exp(logrho[k] - lse);
  }
}

double elbo(const std::vector<double>& x, const VbPrior& prior,
            const VbState& st, const std::vector<std::vector<double>>& resp) {
  const int k_max = static_cast<int>(st.alpha.size());
  std::vector<double> eln_pi, eln_lam;
  expectations(st, eln_pi, eln_lam);
  const double alpha_hat = std::accumulate(st.alpha.begin(), st.alpha.end(), 0.0);

  double e_data = 0.0, e_z = 0.0, e_prior_param = 0.0;
  for (int k = 0; k < k_max; ++k) {
    const double elam = st.a[k] / st.rte[k];
    e_data += 0.5 * st.nk[k] *
              (eln_lam[k] - 1.0 / st.beta[k] -
               elam * (st.sk[k] + (st.xbar[k] - st.m[k]) * (st.xbar[k] - st.m[k])) -
               kLogTwoPi);
    e_z += st.nk[k] * eln_pi[k];
    e_prior_param +=
        0.5 * (std::log(prior.beta0) - kLogTwoPi) + 0.5 * eln_lam[k] -
        0.5 * prior.beta0 * (1.0 / st.beta[k] + elam * (st.m[k] - prior.m0) * (st.m[k] - prior.m0)) +
        prior.a0 * std::log(prior.rte0) - lgamma_(prior.a0) +
        (prior.a0 - 1.0) * eln_lam[k] - prior.rte0 * elam;
  }
  const double e_prior_pi = lgamma_(k_max * prior.alpha0) -
                            k_max * lgamma_(prior.alpha0) +
                            (prior.alpha0 - 1.0) *
                                std::accumulate(eln_pi.begin(), eln_pi.end(), 0.0);

  double q_z = 0.0;
  for (const auto& r : resp)
    for (int k = 0; k < k_max; ++k)
      if (r[k] > 1e-300) q_z += r[k] * std::log(r[k]);

  double q_pi = lgamma_(alpha_hat);
  for (int k = 0; k < k_max; ++k) {
    q_pi -= lgamma_(st.alpha[k]);
    q_pi += (st.alpha[k] - 1.0) * eln_pi[k];
  }

  double q_param = 0.0;
  for (int k = 0; k < k_max; ++k) {
    const double h_gamma = lgamma_(st.a[k]) - (st.a[k] - 1.0) * digamma(st.a[k]) -
                           std::log(st.rte[k]) + st.a[k];
    q_param += 0.5 * eln_lam[k] + 0.5 * (std::log(st.beta[k]) - kLogTwoPi) - 0.5 -
               h_gamma;
  }

  return e_data + e_z + e_prior_pi + e_prior_param - q_z - q_pi - q_param;
}

}  // namespace

VbFitResult vb_fit(const std::vector<double>& samples, const VbPrior& prior,
                   int k_max, int max_iters, double elbo_tol) {
  if (!prior.valid()) throw std::invalid_argument("vb_fit: invalid prior");
  if (k_max < 1) throw std::invalid_argument("vb_fit: k_max must be >= 1");
  const int n = static_cast<int>(samples.size());
  if (n < 2 * k_max)
    throw std::invalid_argument("vb_fit: insufficient data (need >= 2*k_max samples)");
  for (const double s : samples)
    if (!std::isfinite(s)) throw std::invalid_argument("vb_fit: non-finite sample");

  // Quantile-spread seeds with pooled variance; the index tilt breaks exact
  // symmetry so identical seeds cannot lock into an even split.
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> seeds(k_max);
  for (int k = 0; k < k_max; ++k) {
    const int idx = std::min(n - 1, static_cast<int>((k + 0.5) / k_max * n));
    seeds[k] = sorted[idx];
  }
  double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double var = 0.0;
  for (const double s : samples) var += (s - mean) * (s - mean);
  var = std::max(var / n, 1e-6);

  std::vector<std::vector<double>> resp(n, std::vector<double>(k_max));
  for (int i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> lr(k_max);
    for (int k = 0; k < k_max; ++k) {
      const double d = samples[i] - seeds[k];
      lr[k] = -0.5 * d * d / var - 1e-3 * k;
      mx = std::max(mx, lr[k]);
    }
    double denom = 0.0;
    for (int k = 0; k < k_max; ++k) denom += std::exp(lr[k] - mx);
    for (int k = 0; k < k_max; ++k)
      resp[i][k] = std::exp(lr[k] - mx) / denom;
  }

  VbState st;
  st.alpha.assign(k_max, prior.alpha0);
  st.beta.assign(k_max, prior.beta0);
  st.m.assign(k_max, prior.m0);
  st.a.assign(k_max, prior.a0);
  st.rte.assign(k_max, prior.rte0);

  VbFitResult result;
  accumulate_stats(samples, resp, st);
  m_step(prior, st);
  for (int iter = 0; iter < max_iters; ++iter) {
    e_step(samples, st, resp);
    accumulate_stats(samples, resp, st);
    const double l = elbo(samples, prior, st, resp);
    if (!std::isfinite(l))
      throw std::runtime_error("vb_fit: non-finite ELBO");
    result.elbo_trace.push_back(l);
    result.iterations = iter + 1;
    if (result.elbo_trace.size() >= 2 &&
        std::fabs(l - result.elbo_trace[result.elbo_trace.size() - 2]) < elbo_tol)
      break;
    m_step(prior, st);
  }

  const double alpha_hat = std::accumulate(st.alpha.begin(), st.alpha.end(), 0.0);
  GmmModel& gmm = result.model;
  gmm.comps.resize(k_max);
  for (int k = 0; k < k_max; ++k) {
    GmmComponent& c = gmm.comps[k];
    c.w = st.alpha[k] / alpha_hat;
    c.mu = st.m[k];
    // posterior mean of the variance, E[1/lambda] = rte / (a - 1)
    c.var = st.a[k] > 1.0 + 1e-9 ? st.rte[k] / (st.a[k] - 1.0)
                                 : st.rte[k] / st.a[k];
    c.alpha = st.alpha[k];
    c.beta = st.beta[k];
    c.m = st.m[k];
    c.a = st.a[k];
    c.rte = st.rte[k];
  }
  std::sort(gmm.comps.begin(), gmm.comps.end(),
            [](const GmmComponent& a, const GmmComponent& b) { return a.mu < b.mu; });
  return result;
}

GmmModel prune(const GmmModel& gmm, double weight_floor) {
  if (weight_floor < 0.0 || weight_floor >= 0.5)
    throw std::invalid_argument("prune: weight_floor must be in [0, 0.5)");
  if (gmm.comps.empty()) throw std::invalid_argument("prune: empty mixture");

  GmmModel out;
  for (const auto& c : gmm.comps)
    if (c.w >= weight_floor) out.comps.push_back(c);
  if (out.comps.empty()) {
    // keep the heaviest component rather than emptying the model
    const auto best = std::max_element(
        gmm.comps.begin(), gmm.comps.end(),
        [](const GmmComponent& a, const GmmComponent& b) { return a.w < b.w; });
    out.comps.push_back(*best);
  }
  double wsum = 0.0;
  for (const auto& c : out.comps) wsum += c.w;
  for (auto& c : out.comps) c.w /= wsum;
  return out;
}

GmmModel eliminate_shift(const GmmModel& gmm) {
  if (gmm.comps.empty())
    throw std::invalid_argument("eliminate_shift: empty mixture");
  int dominant = 0;
  for (int k = 1; k < gmm.K(); ++k) {
    const auto& cand = gmm.comps[k];
    const auto& best = gmm.comps[dominant];
    if (cand.w > best.w || (cand.w == best.w && cand.var < best.var))
      dominant = k;
  }
  const double shift = gmm.comps[dominant].mu;
  GmmModel out = gmm;
  for (auto& c : out.comps) {
    c.mu -= shift;
    c.m -= shift;
  }
  return out;
}

double mean_log_likelihood(const GmmModel& gmm,
                           const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("mean_log_likelihood: no samples");
  double acc = 0.0;
  for (const double s : samples) acc += -gmm_nll(gmm, s);
  return acc / static_cast<double>(samples.size());
}

}  // namespace ctfgo
