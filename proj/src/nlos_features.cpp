#include "ctfgo/nlos_features.hpp"

#include <cmath>
#include <stdexcept>

namespace ctfgo {

std::vector<SatFeatureVector> extract_features(
    const std::vector<SatObservation>& epoch, const StateKnot& prior_state,
    FeatureHistory& history) {
  if (epoch.empty())
    throw std::invalid_argument("extract_features: empty epoch");

  const double n = static_cast<double>(epoch.size());
  double mean = 0.0;
  for (const auto& o : epoch) mean += o.cn0;
  mean /= n;
  double var = 0.0;
  for (const auto& o : epoch) var += (o.cn0 - mean) * (o.cn0 - mean);
  const double stddev = std::sqrt(var / n);

  std::vector<SatFeatureVector> out;
  out.reserve(epoch.size());
  for (const auto& o : epoch) {
    SatFeatureVector f;
    f.cn0 = o.cn0;
    f.elevation = o.elevation;
    f.residual_prior = pseudorange_residual(prior_state, o);
    f.cn0_epoch_mean = mean;
    f.cn0_epoch_std = stddev;
    const auto it = history.find(o.sat_id);
    f.cn0_delta = it == history.end() ? 0.0 : o.cn0 - it->second;
    f.sat_count = n;
    out.push_back(f);
  }
  for (const auto& o : epoch) history[o.sat_id] = o.cn0;
  return out;
}

}  // namespace ctfgo
