#include "ctfgo/scenario.hpp"

#include <cmath>

#include <json.hpp>

namespace ctfgo {

namespace {
constexpr double kTwoPi = 6.283185307179586;
constexpr double kDeg = M_PI / 180.0;

double wrap_azimuth(double az) {
  double a = std::fmod(az, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}
}  // namespace

bool MaskSector::blocks(double azimuth, double elevation) const {
  if (elevation >= min_blocked_elevation) return false;
  if (az_hi - az_lo >= kTwoPi) return true;  // full-circle wall
  const double az = wrap_azimuth(azimuth);
  const double lo = wrap_azimuth(az_lo);
  const double hi = wrap_azimuth(az_hi);
  if (lo <= hi) return az >= lo && az <= hi;
  return az >= lo || az <= hi;  // wrapped sector
}

ScenarioConfig ScenarioConfig::default_urban(std::uint64_t seed) {
  ScenarioConfig c;
  c.seed = seed;
  c.duration = 600.0;
  c.epoch_rate = 1.0;
  c.route = {
      {Vec3(0.0, 0.0, 0.0), 10.0},
      {Vec3(2000.0, 0.0, 0.0), 10.0},
      {Vec3(2000.0, 1000.0, 0.0), 10.0},
      {Vec3(0.0, 1000.0, 0.0), 10.0},
      {Vec3(0.0, 0.0, 0.0), 10.0},
  };
  c.mask_sectors = {
      {60.0 * kDeg, 120.0 * kDeg, 40.0 * kDeg},
      {240.0 * kDeg, 300.0 * kDeg, 40.0 * kDeg},
  };
  return c;
}

bool ScenarioConfig::valid(std::string* why) const {
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (route.size() < 2) return fail("route needs at least 2 waypoints");
  if (duration <= 0.0) return fail("duration must be > 0");
  if (epoch_rate <= 0.0) return fail("epoch_rate must be > 0");
  if (odom_rate > epoch_rate) return fail("odom_rate must be <= epoch_rate");
  if (sat_count < 1) return fail("sat_count must be >= 1");
  if (los_sigma <= 0.0 || nlos_extra_sigma <= 0.0 || odom_sigma <= 0.0)
    return fail("all sigmas must be > 0");
  if (nlos_bias_mean < 0.0) return fail("nlos_bias_mean must be >= 0");
  return true;
}

std::string ScenarioConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["duration"] = duration;
  j["epoch_rate"] = epoch_rate;
  for (const auto& w : route)
    j["route"].push_back({{"position", {w.position.x(), w.position.y(), w.position.z()}},
                          {"speed", w.speed}});
  j["sat_count"] = sat_count;
  j["shell_radius"] = shell_radius;
  j["mask_sectors"] = nlohmann::json::array();
  for (const auto& m : mask_sectors)
    j["mask_sectors"].push_back({{"az_lo", m.az_lo},
                                 {"az_hi", m.az_hi},
                                 {"min_blocked_elevation", m.min_blocked_elevation}});
  j["los_sigma"] = los_sigma;
  j["los_bias"] = los_bias;
  j["nlos_bias_mean"] = nlos_bias_mean;
  j["nlos_bias_model"] =
      nlos_bias_model == NlosBiasModel::exponential ? "exponential" : "gaussian";
  j["nlos_extra_sigma"] = nlos_extra_sigma;
  j["cn0_los_mean"] = cn0_los_mean;
  j["cn0_nlos_depression"] = cn0_nlos_depression;
  j["odom_rate"] = odom_rate;
  j["odom_sigma"] = odom_sigma;
  j["clock_bias0"] = clock_bias0;
  j["clock_drift0"] = clock_drift0;
  return j.dump(2);
}

ScenarioConfig ScenarioConfig::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ScenarioConfig c;
  c.seed = j.value("seed", c.seed);
  c.duration = j.value("duration", c.duration);
  c.epoch_rate = j.value("epoch_rate", c.epoch_rate);
  if (j.contains("route")) {
    c.route.clear();
    for (const auto& w : j.at("route")) {
      RouteWaypoint wp;
      const auto& p = w.at("position");
      wp.position = Vec3(p.at(0), p.at(1), p.at(2));
      wp.speed = w.value("speed", 10.0);
      c.route.push_back(wp);
    }
  }
  c.sat_count = j.value("sat_count", c.sat_count);
  c.shell_radius = j.value("shell_radius", c.shell_radius);
  if (j.contains("mask_sectors")) {
    c.mask_sectors.clear();
    for (const auto& m : j.at("mask_sectors"))
      c.mask_sectors.push_back({m.at("az_lo"), m.at("az_hi"),
                                m.at("min_blocked_elevation")});
  }
  c.los_sigma = j.value("los_sigma", c.los_sigma);
  c.los_bias = j.value("los_bias", c.los_bias);
  c.nlos_bias_mean = j.value("nlos_bias_mean", c.nlos_bias_mean);
  if (j.contains("nlos_bias_model"))
    c.nlos_bias_model = j.at("nlos_bias_model") == "gaussian"
                            ? NlosBiasModel::gaussian
                            : NlosBiasModel::exponential;
  c.nlos_extra_sigma = j.value("nlos_extra_sigma", c.nlos_extra_sigma);
  c.cn0_los_mean = j.value("cn0_los_mean", c.cn0_los_mean);
  c.cn0_nlos_depression = j.value("cn0_nlos_depression", c.cn0_nlos_depression);
  c.odom_rate = j.value("odom_rate", c.odom_rate);
  c.odom_sigma = j.value("odom_sigma", c.odom_sigma);
  c.clock_bias0 = j.value("clock_bias0", c.clock_bias0);
  c.clock_drift0 = j.value("clock_drift0", c.clock_drift0);
  return c;
}

}  // namespace ctfgo
