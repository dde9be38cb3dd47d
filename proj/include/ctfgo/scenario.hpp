#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctfgo/state.hpp"

namespace ctfgo {

struct RouteWaypoint {
  Vec3 position = Vec3::Zero();  // meters, local frame
  double speed = 10.0;           // m/s toward the next waypoint
};

/// Canyon wall: satellites inside the azimuth range and below
/// min_blocked_elevation are received NLOS.
struct MaskSector {
  double az_lo = 0.0;  // rad
  double az_hi = 0.0;  // rad, may wrap past 2 pi
  double min_blocked_elevation = 0.0;  // rad

  bool blocks(double azimuth, double elevation) const;
};

enum class NlosBiasModel { exponential, gaussian };

struct ScenarioConfig {
  std::uint64_t seed = 1;
  double duration = 600.0;   // s
  double epoch_rate = 1.0;   // Hz
  std::vector<RouteWaypoint> route;
  int sat_count = 20;
  double shell_radius = 2.6e7;  // m
  std::vector<MaskSector> mask_sectors;
  double los_sigma = 1.0;        // m
  double los_bias = 0.0;         // m, constant offset injected into LOS ranges
  double nlos_bias_mean = 30.0;  // m
  NlosBiasModel nlos_bias_model = NlosBiasModel::exponential;
  double nlos_extra_sigma = 5.0;   // m
  double cn0_los_mean = 45.0;      // dB-Hz
  double cn0_nlos_depression = 10.0;
  double odom_rate = 1.0;   // Hz, <= epoch_rate
  double odom_sigma = 0.1;  // m per axis
  double clock_bias0 = 100.0;  // m
  double clock_drift0 = 0.5;   // m/s

  /// Default urban canyon: 600 s rectangle loop at 10 m/s with two wall
  /// sectors blocking [60,120] and [240,300] degrees below 40 degrees.
  static ScenarioConfig default_urban(std::uint64_t seed);

  std::string to_json() const;
  static ScenarioConfig from_json(const std::string& text);

  bool valid(std::string* why = nullptr) const;
};

}  // namespace ctfgo
