#pragma once

#include <map>
#include <vector>

#include "ctfgo/measurements.hpp"

namespace ctfgo {

/// Per-satellite feature vector mixing signal strength, geometry, the
/// residual against the propagated prior state, and cross-satellite /
/// temporal context.
struct SatFeatureVector {
  double cn0 = 0.0;
  double elevation = 0.0;
  double residual_prior = 0.0;
  double cn0_epoch_mean = 0.0;
  double cn0_epoch_std = 0.0;
  double cn0_delta = 0.0;  // vs previous epoch, 0 if unseen
  double sat_count = 1.0;

  static constexpr int kDim = 7;
  Eigen::Matrix<double, kDim, 1> vector() const {
    Eigen::Matrix<double, kDim, 1> x;
    x << cn0, elevation, residual_prior, cn0_epoch_mean, cn0_epoch_std,
        cn0_delta, sat_count;
    return x;
  }
};

/// Last-seen C/N0 per satellite, carried across epochs.
using FeatureHistory = std::map<int, double>;

/// One feature vector per observation; epoch statistics use the population
/// convention; the history is updated in place.
std::vector<SatFeatureVector> extract_features(
    const std::vector<SatObservation>& epoch, const StateKnot& prior_state,
    FeatureHistory& history);

}  // namespace ctfgo
