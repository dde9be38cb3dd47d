#include "ctfgo/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ctfgo/csv.hpp"

namespace ctfgo {

namespace {
constexpr double kTwoPi = 6.283185307179586;
constexpr double kAzimuthRate = 0.004;  // rad/s constellation drift
constexpr double kGoldenRatioConj = 0.6180339887498949;
constexpr double kElevMin = 8.0 * M_PI / 180.0;
constexpr double kElevMax = 82.0 * M_PI / 180.0;

double wrap_azimuth(double az) {
  double a = std::fmod(az, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}
}  // namespace

const EpochRecord& Dataset::at_time(double t) const {
  for (const auto& e : epochs)
    if (std::fabs(e.t - t) < 1e-9) return e;
  throw std::out_of_range("dataset: no epoch at requested time");
}

std::vector<StateKnot> generate_truth(const ScenarioConfig& config) {
  std::string why;
  if (!config.valid(&why)) throw std::invalid_argument("scenario: " + why);

  // Arc-length table over the route polyline.
  struct Segment {
    Vec3 a, dir;
    double len, speed, t0, t1;
  };
  std::vector<Segment> segs;
  double t_cursor = 0.0;
  for (size_t i = 0; i + 1 < config.route.size(); ++i) {
    const Vec3 a = config.route[i].position;
    const Vec3 b = config.route[i + 1].position;
    const double len = (b - a).norm();
    const double speed = config.route[i].speed;
    if (speed <= 0.0) throw std::invalid_argument("scenario: waypoint speed must be > 0");
    if (len == 0.0) continue;
    Segment s;
    s.a = a;
    s.dir = (b - a) / len;
    s.len = len;
    s.speed = speed;
    s.t0 = t_cursor;
    t_cursor += len / speed;
    s.t1 = t_cursor;
    segs.push_back(s);
  }

  const Vec3 final_pos = config.route.back().position;
  auto position_at = [&](double t) -> Vec3 {
    for (const auto& s : segs)
      if (t <= s.t1) return s.a + s.dir * (s.speed * std::max(0.0, t - s.t0));
    return final_pos;  // parked after the route ends
  };

  const int n = static_cast<int>(std::floor(config.duration * config.epoch_rate + 0.5));
  const double dt = 1.0 / config.epoch_rate;
  std::vector<StateKnot> truth(n);
  for (int k = 0; k < n; ++k) {
    truth[k].t = k * dt;
    truth[k].p = position_at(truth[k].t);
    truth[k].b = config.clock_bias0 + config.clock_drift0 * truth[k].t;
    truth[k].d = config.clock_drift0;
  }
  for (int k = 0; k < n; ++k) {
    // velocities are forward differences so they match position deltas exactly
    if (k + 1 < n)
      truth[k].v = (truth[k + 1].p - truth[k].p) / dt;
    else if (n > 1)
      truth[k].v = truth[k - 1].v;
  }
  return truth;
}

std::pair<double, double> elevation_azimuth(const Vec3& receiver_pos,
                                            const Vec3& sat_pos) {
  const Vec3 dir = (sat_pos - receiver_pos).normalized();
  const double el = std::asin(std::clamp(dir.z(), -1.0, 1.0));
  double az = std::atan2(dir.x(), dir.y());
  return {el, wrap_azimuth(az)};
}

std::vector<SatelliteState> place_constellation(const ScenarioConfig& config,
                                                double t,
                                                const Vec3& receiver_pos) {
  std::vector<SatelliteState> sats(config.sat_count);
  const int n = config.sat_count;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n;
    // low-elevation-heavy grid, matching masked urban skies
    const double el = kElevMin + (kElevMax - kElevMin) * u * u * u;
    const double az =
        wrap_azimuth(kTwoPi * std::fmod(i * kGoldenRatioConj, 1.0) +
                     kAzimuthRate * t);
    SatelliteState s;
    s.sat_id = i;
    s.pos = config.shell_radius *
            Vec3(std::cos(el) * std::sin(az), std::cos(el) * std::cos(az),
                 std::sin(el));
    std::tie(s.elevation, s.azimuth) = elevation_azimuth(receiver_pos, s.pos);
    sats[i] = s;
  }
  return sats;
}

EpochRecord synthesize_epoch(const StateKnot& truth,
                             const std::vector<SatelliteState>& sats,
                             const ScenarioConfig& config,
                             const CounterRng& rng,
                             std::uint64_t epoch_index) {
  EpochRecord rec;
  rec.t = truth.t;
  rec.truth = truth;
  rec.observations.reserve(sats.size());
  for (size_t si = 0; si < sats.size(); ++si) {
    const auto& sat = sats[si];
    const std::uint64_t ctr = epoch_index * 1024 + si;

    bool nlos = false;
    for (const auto& sector : config.mask_sectors)
      nlos |= sector.blocks(sat.azimuth, sat.elevation);

    const double range = (sat.pos - truth.p).norm();
    double rho = range + truth.b +
                 config.los_sigma * rng.normal(NoiseStream::los_noise, ctr);
    if (nlos) {
      double delay = 0.0;
      if (config.nlos_bias_model == NlosBiasModel::exponential) {
        delay = rng.exponential(NoiseStream::nlos_delay, config.nlos_bias_mean, ctr);
      } else {
        delay = config.nlos_bias_mean +
                0.5 * config.nlos_bias_mean * rng.normal(NoiseStream::nlos_delay, ctr);
        delay = std::max(0.0, delay);
      }
      rho += delay +
             config.nlos_extra_sigma * rng.normal(NoiseStream::nlos_extra, ctr);
    } else {
      rho += config.los_bias;
    }

    double cn0 = config.cn0_los_mean + 2.0 * rng.normal(NoiseStream::cn0, ctr);
    if (nlos) cn0 -= config.cn0_nlos_depression;

    SatObservation obs;
    obs.sat_id = sat.sat_id;
    obs.sat_pos = sat.pos;
    obs.rho = rho;
    obs.cn0 = cn0;
    obs.elevation = sat.elevation;
    obs.azimuth = sat.azimuth;
    obs.los_truth = !nlos;
    obs.t = truth.t;
    rec.observations.push_back(obs);
  }
  return rec;
}

std::vector<OdometryMeasurement> synthesize_odometry(
    const std::vector<StateKnot>& truth, const ScenarioConfig& config,
    const CounterRng& rng) {
  std::vector<OdometryMeasurement> out;
  if (truth.size() < 2 || config.odom_rate <= 0.0) return out;
  const int step = std::max(
      1, static_cast<int>(std::floor(config.epoch_rate / config.odom_rate + 0.5)));
  for (size_t k = 0; k + step < truth.size(); k += step) {
    OdometryMeasurement odo;
    odo.t_i = truth[k].t;
    odo.t_j = truth[k + step].t;
    const Vec3 noise(rng.normal(NoiseStream::odometry, k, 0),
                     rng.normal(NoiseStream::odometry, k, 1),
                     rng.normal(NoiseStream::odometry, k, 2));
    odo.delta_p = truth[k + step].p - truth[k].p + config.odom_sigma * noise;
    odo.sigma = Vec3::Constant(config.odom_sigma);
    out.push_back(odo);
  }
  return out;
}

Dataset simulate(const ScenarioConfig& config) {
  Dataset ds;
  ds.config = config;
  const CounterRng rng(config.seed);
  const std::vector<StateKnot> truth = generate_truth(config);
  ds.epochs.reserve(truth.size());
  for (size_t k = 0; k < truth.size(); ++k) {
    const auto sats = place_constellation(config, truth[k].t, truth[k].p);
    ds.epochs.push_back(synthesize_epoch(truth[k], sats, config, rng, k));
  }
  for (const auto& odo : synthesize_odometry(truth, config, rng)) {
    for (auto& e : ds.epochs) {
      if (std::fabs(e.t - odo.t_j) < 1e-9) {
        e.odometry = odo;
        break;
      }
    }
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::ofstream obs(fs::path(dir) / "obs.csv");
  obs << "t,sat_id,sat_x,sat_y,sat_z,pseudorange,cn0,elevation,azimuth,los_truth\n";
  for (const auto& e : dataset.epochs)
    for (const auto& o : e.observations)
      obs << fmt_double(o.t) << ',' << o.sat_id << ',' << fmt_double(o.sat_pos.x())
          << ',' << fmt_double(o.sat_pos.y()) << ',' << fmt_double(o.sat_pos.z())
          << ',' << fmt_double(o.rho) << ',' << fmt_double(o.cn0) << ','
          << fmt_double(o.elevation) << ',' << fmt_double(o.azimuth) << ','
          << (o.los_truth.value_or(true) ? 1 : 0) << '\n';

  std::ofstream tr(fs::path(dir) / "truth.csv");
  tr << "t,px,py,pz,vx,vy,vz,clock_bias,clock_drift\n";
  for (const auto& e : dataset.epochs) {
    const auto& s = e.truth;
    tr << fmt_double(s.t) << ',' << fmt_double(s.p.x()) << ',' << fmt_double(s.p.y())
       << ',' << fmt_double(s.p.z()) << ',' << fmt_double(s.v.x()) << ','
       << fmt_double(s.v.y()) << ',' << fmt_double(s.v.z()) << ','
       << fmt_double(s.b) << ',' << fmt_double(s.d) << '\n';
  }

  std::ofstream od(fs::path(dir) / "odom.csv");
  od << "t_i,t_j,dx,dy,dz,sigma_x,sigma_y,sigma_z\n";
  for (const auto& e : dataset.epochs) {
    if (!e.odometry) continue;
    const auto& o = *e.odometry;
    od << fmt_double(o.t_i) << ',' << fmt_double(o.t_j) << ','
       << fmt_double(o.delta_p.x()) << ',' << fmt_double(o.delta_p.y()) << ','
       << fmt_double(o.delta_p.z()) << ',' << fmt_double(o.sigma.x()) << ','
       << fmt_double(o.sigma.y()) << ',' << fmt_double(o.sigma.z()) << '\n';
  }

  std::ofstream mf(fs::path(dir) / "manifest.json");
  mf << dataset.config.to_json() << '\n';
}

Dataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw std::runtime_error("dataset: missing manifest.json in " + dir);
  std::string manifest((std::istreambuf_iterator<char>(mf)),
                       std::istreambuf_iterator<char>());
  Dataset ds;
  ds.config = ScenarioConfig::from_json(manifest);

  const auto truth_rows = read_csv((fs::path(dir) / "truth.csv").string());
  for (const auto& r : truth_rows) {
    EpochRecord e;
    e.t = std::stod(r[0]);
    e.truth.t = e.t;
    e.truth.p = Vec3(std::stod(r[1]), std::stod(r[2]), std::stod(r[3]));
    e.truth.v = Vec3(std::stod(r[4]), std::stod(r[5]), std::stod(r[6]));
    e.truth.b = std::stod(r[7]);
    e.truth.d = std::stod(r[8]);
    ds.epochs.push_back(std::move(e));
  }

  auto epoch_at = [&](double t) -> EpochRecord& {
    for (auto& e : ds.epochs)
      if (std::fabs(e.t - t) < 1e-9) return e;
    throw std::runtime_error("dataset: observation at unknown epoch time");
  };

  const auto obs_rows = read_csv((fs::path(dir) / "obs.csv").string());
  for (const auto& r : obs_rows) {
    SatObservation o;
    o.t = std::stod(r[0]);
    o.sat_id = std::stoi(r[1]);
    o.sat_pos = Vec3(std::stod(r[2]), std::stod(r[3]), std::stod(r[4]));
    o.rho = std::stod(r[5]);
    o.cn0 = std::stod(r[6]);
    o.elevation = std::stod(r[7]);
    o.azimuth = std::stod(r[8]);
    o.los_truth = std::stoi(r[9]) != 0;
    epoch_at(o.t).observations.push_back(o);
  }

  if (fs::exists(fs::path(dir) / "odom.csv")) {
    const auto odo_rows = read_csv((fs::path(dir) / "odom.csv").string());
    for (const auto& r : odo_rows) {
      OdometryMeasurement o;
      o.t_i = std::stod(r[0]);
      o.t_j = std::stod(r[1]);
      o.delta_p = Vec3(std::stod(r[2]), std::stod(r[3]), std::stod(r[4]));
      o.sigma = Vec3(std::stod(r[5]), std::stod(r[6]), std::stod(r[7]));
      epoch_at(o.t_j).odometry = o;
    }
  }
  return ds;
}

}  // namespace ctfgo
