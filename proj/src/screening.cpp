#include "ctfgo/screening.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ctfgo {

ScreenResult screen_epoch(const std::vector<SatObservation>& epoch,
                          const std::vector<Prediction>& predictions,
                          const ScreenPolicy& policy) {
  if (predictions.size() != epoch.size())
    throw std::invalid_argument("screen_epoch: predictions misaligned with epoch");

  ScreenResult out;
  std::vector<int> flagged;
  for (size_t i = 0; i < epoch.size(); ++i) {
    if (predictions[i].is_nlos)
      flagged.push_back(static_cast<int>(i));
    else
      out.kept.push_back(epoch[i]);
  }

  const size_t want =
      std::min<size_t>(static_cast<size_t>(std::max(policy.min_keep, 0)), epoch.size());
  if (out.kept.size() < want) {
    // retain the least suspicious flagged observations
    std::sort(flagged.begin(), flagged.end(), [&](int a, int b) {
      if (predictions[a].probability != predictions[b].probability)
        return predictions[a].probability < predictions[b].probability;
      return a < b;
    });
    size_t idx = 0;
    while (out.kept.size() < want && idx < flagged.size()) {
      out.kept.push_back(epoch[flagged[idx]]);
      out.retained_under_protest.push_back(epoch[flagged[idx]].sat_id);
      ++idx;
    }
    for (; idx < flagged.size(); ++idx) out.excluded.push_back(epoch[flagged[idx]]);
  } else {
    for (const int i : flagged) out.excluded.push_back(epoch[i]);
  }
  return out;
}

}  // namespace ctfgo
