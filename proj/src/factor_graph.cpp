#include "ctfgo/factor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace ctfgo {

Factor Factor::Pseudorange(const SatObservation& obs, NoiseModel noise) {
  Factor f;
  f.kind = FactorKind::pseudorange;
  f.t_meas = obs.t;
  f.payload = obs;
  f.noise = std::move(noise);
  return f;
}

Factor Factor::Odometry(const OdometryMeasurement& odo) {
  Factor f;
  f.kind = FactorKind::odometry;
  f.t_meas = odo.t_i;
  f.payload = odo;
  return f;
}

Factor Factor::Prior(const PriorPayload& prior) {
  Factor f;
  f.kind = FactorKind::prior;
  f.t_meas = prior.mean.t;
  f.payload = prior;
  return f;
}

namespace {

// Total order on measurements so the graph is independent of input order.
std::tuple<double, int, int, double> sort_key(const Factor& f) {
  switch (f.kind) {
    case FactorKind::pseudorange: {
      const auto& obs = std::get<SatObservation>(f.payload);
      return {f.t_meas, 0, obs.sat_id, obs.rho};
    }
    case FactorKind::odometry: {
      const auto& odo = std::get<OdometryMeasurement>(f.payload);
      return {f.t_meas, 1, 0, odo.t_j};
    }
    default:
      return {f.t_meas, 2, 0, 0.0};
  }
}

// Index of the knot within tol of t, or -1.
int aligned_knot(const std::vector<double>& times, double t, double tol) {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  int best = -1;
  double best_err = tol;
  for (auto cand = it == times.begin() ? it : std::prev(it);
       cand != times.end() && *cand <= t + tol; ++cand) {
    const double err = std::fabs(*cand - t);
    if (err <= best_err) {
      best = static_cast<int>(cand - times.begin());
      best_err = err;
    }
  }
  return best;
}

// Bracketing pair (i, i+1) with t strictly inside.
int bracket_left(const std::vector<double>& times, double t) {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const int j = static_cast<int>(it - times.begin());
  return std::clamp(j - 1, 0, static_cast<int>(times.size()) - 2);
}

[[noreturn]] void throw_out_of_span(double t) {
  std::ostringstream os;
  os.precision(17);
  os << "build_graph: measurement at t=" << t << " outside knot span";
  throw std::out_of_range(os.str());
}

}  // namespace

FactorGraph build_graph(const std::vector<double>& knot_times,
                        std::vector<Factor> measurements,
                        const GraphConfig& config) {
  if (knot_times.empty())
    throw std::invalid_argument("build_graph: empty knot list");
  for (size_t i = 1; i < knot_times.size(); ++i)
    if (!(knot_times[i] > knot_times[i - 1]))
      throw std::invalid_argument("build_graph: knot times must be strictly increasing");
  if (!config.hp.valid())
    throw std::invalid_argument("build_graph: invalid GP hyperparameters");

  const double t_first = knot_times.front();
  const double t_last = knot_times.back();
  const double tol = config.alignment_tol;

  FactorGraph graph;
  graph.knot_times = knot_times;
  graph.hp = config.hp;

  // Anchor prior on the first knot.
  {
    PriorPayload prior = config.prior;
    prior.mean.t = t_first;
    BoundFactor bf;
    bf.factor = Factor::Prior(prior);
    bf.knots = {0};
    graph.factors.push_back(std::move(bf));
  }

  // GP prior chain.
  for (int i = 0; i + 1 < graph.num_knots(); ++i) {
    GpPriorPayload gp;
    gp.dt = knot_times[i + 1] - knot_times[i];
    gp.phi = transition(gp.dt);
    gp.info_sqrt = inverse_sqrt(process_cov(gp.dt, config.hp));
    BoundFactor bf;
    bf.factor.kind = FactorKind::gp_prior;
    bf.factor.t_meas = knot_times[i];
    bf.factor.payload = gp;
    bf.knots = {i, i + 1};
    graph.factors.push_back(std::move(bf));
  }

  std::sort(measurements.begin(), measurements.end(),
            [](const Factor& a, const Factor& b) { return sort_key(a) < sort_key(b); });

  for (auto& m : measurements) {
    switch (m.kind) {
      case FactorKind::pseudorange: {
        const double t = m.t_meas;
        if (t < t_first - tol || t > t_last + tol) throw_out_of_span(t);
        BoundFactor bf;
        bf.factor = std::move(m);
        const int k = aligned_knot(knot_times, t, tol);
        if (k >= 0) {
          bf.knots = {k};
        } else {
          const int i = bracket_left(knot_times, t);
          bf.knots = {i, i + 1};
          bf.interp = make_interpolant(i, i + 1, knot_times[i],
                                       knot_times[i + 1], t, config.hp);
        }
        graph.factors.push_back(std::move(bf));
        break;
      }
      case FactorKind::odometry: {
        const auto& odo = std::get<OdometryMeasurement>(m.payload);
        if (odo.t_i < t_first - tol || odo.t_j > t_last + tol)
          throw_out_of_span(odo.t_i < t_first - tol ? odo.t_i : odo.t_j);
        const int ki = aligned_knot(knot_times, odo.t_i, tol);
        const int kj = aligned_knot(knot_times, odo.t_j, tol);
        if (ki < 0 || kj < 0) {
          std::ostringstream os;
          os << "build_graph: odometry endpoints (" << odo.t_i << ", "
             << odo.t_j << ") must align with knot times";
          throw std::invalid_argument(os.str());
        }
        BoundFactor bf;
        bf.factor = std::move(m);
        bf.knots = {ki, kj};
        graph.factors.push_back(std::move(bf));
        break;
      }
      case FactorKind::prior: {
        const double t = m.t_meas;
        const int k = aligned_knot(knot_times, t, tol);
        if (k < 0) throw_out_of_span(t);
        BoundFactor bf;
        bf.factor = std::move(m);
        bf.knots = {k};
        graph.factors.push_back(std::move(bf));
        break;
      }
      case FactorKind::gp_prior:
        throw std::invalid_argument(
            "build_graph: gp_prior factors are generated, not supplied");
    }
  }
  return graph;
}

}  // namespace ctfgo
