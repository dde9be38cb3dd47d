#pragma once

#include <optional>

#include "ctfgo/measurements.hpp"
#include "ctfgo/rng.hpp"
#include "ctfgo/scenario.hpp"

namespace ctfgo {

struct EpochRecord {
  double t = 0.0;
  StateKnot truth;
  std::vector<SatObservation> observations;
  std::optional<OdometryMeasurement> odometry;
};

struct Dataset {
  ScenarioConfig config;
  std::vector<EpochRecord> epochs;

  const EpochRecord& at_time(double t) const;
};

struct SatelliteState {
  int sat_id = 0;
  Vec3 pos = Vec3::Zero();
  double elevation = 0.0;  // rad, from the receiver position
  double azimuth = 0.0;    // rad in [0, 2 pi)
};

/// Ground-truth trajectory sampled at epoch_rate: piecewise-constant-speed
/// traversal of the route; velocities are forward differences of the sampled
/// positions; the clock is a linear drift.
std::vector<StateKnot> generate_truth(const ScenarioConfig& config);

/// Elevation and azimuth of a satellite as seen from the receiver, in the
/// local tangent frame (x east, y north, z up).
std::pair<double, double> elevation_azimuth(const Vec3& receiver_pos,
                                            const Vec3& sat_pos);

/// Deterministic az/el shell grid, rotating in azimuth at 0.004 rad/s.
/// Elevation/azimuth are computed in the local tangent frame at the receiver.
std::vector<SatelliteState> place_constellation(const ScenarioConfig& config,
                                                double t,
                                                const Vec3& receiver_pos);

/// One epoch of labeled pseudorange observations.
EpochRecord synthesize_epoch(const StateKnot& truth,
                             const std::vector<SatelliteState>& sats,
                             const ScenarioConfig& config,
                             const CounterRng& rng, std::uint64_t epoch_index);

/// Displacement odometry between consecutive odometry epochs.
std::vector<OdometryMeasurement> synthesize_odometry(
    const std::vector<StateKnot>& truth, const ScenarioConfig& config,
    const CounterRng& rng);

/// Full scenario generation.
Dataset simulate(const ScenarioConfig& config);

/// Dataset files: obs.csv, truth.csv, odom.csv, manifest.json.
void save_dataset(const Dataset& dataset, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace ctfgo
