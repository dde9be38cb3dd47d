#pragma once

#include "ctfgo/classifier.hpp"

namespace ctfgo {

struct ScreenPolicy {
  int min_keep = 4;  // never screen an epoch below this many observations
};

struct ScreenResult {
  std::vector<SatObservation> kept;
  std::vector<SatObservation> excluded;
  /// Flagged observations retained to satisfy min_keep.
  std::vector<int> retained_under_protest;  // sat ids
};

/// Removes flagged observations. If fewer than min_keep would remain, the
/// lowest-probability flagged observations are retained (under protest)
/// until min(min_keep, epoch size) are kept.
ScreenResult screen_epoch(const std::vector<SatObservation>& epoch,
                          const std::vector<Prediction>& predictions,
                          const ScreenPolicy& policy = {});

}  // namespace ctfgo
