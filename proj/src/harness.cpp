#include "ctfgo/harness.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ctfgo/csv.hpp"

namespace ctfgo {

const char* kOutputRootEnv = "CTFGO_OUTPUT_ROOT";

const char* noise_treatment_name(NoiseTreatment n) {
  switch (n) {
    case NoiseTreatment::gaussian: return "gaussian";
    case NoiseTreatment::cauchy: return "cauchy";
    case NoiseTreatment::huber: return "huber";
    case NoiseTreatment::gmm_shift: return "gmm_shift";
    case NoiseTreatment::gmm_naive: return "gmm_naive";
  }
  return "?";
}

const char* screening_mode_name(ScreeningMode s) {
  switch (s) {
    case ScreeningMode::off: return "off";
    case ScreeningMode::baseline: return "baseline";
    case ScreeningMode::oracle: return "oracle";
  }
  return "?";
}

NoiseTreatment noise_treatment_from_name(const std::string& name) {
  if (name == "gaussian") return NoiseTreatment::gaussian;
  if (name == "cauchy") return NoiseTreatment::cauchy;
  if (name == "huber") return NoiseTreatment::huber;
  if (name == "gmm_shift") return NoiseTreatment::gmm_shift;
  if (name == "gmm_naive") return NoiseTreatment::gmm_naive;
  throw std::invalid_argument("unknown noise model: " + name);
}

ScreeningMode screening_mode_from_name(const std::string& name) {
  if (name == "off") return ScreeningMode::off;
  if (name == "baseline") return ScreeningMode::baseline;
  if (name == "oracle") return ScreeningMode::oracle;
  throw std::invalid_argument("unknown screening mode: " + name);
}

std::string resolve_output_dir(const std::string& dir) {
  const char* root = std::getenv(kOutputRootEnv);
  if (!root || !*root || dir.empty()) return dir;
  const std::filesystem::path p(dir);
  if (p.is_absolute()) return dir;
  return (std::filesystem::path(root) / p).string();
}

std::string RunConfig::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario_dir;
  j["noise_model"] = noise_treatment_name(noise_model);
  j["screening"] = screening_mode_name(screening);
  j["knot_rate"] = knot_rate;
  j["window_span"] = window_span;
  j["pr_sigma"] = pr_sigma;
  j["cauchy_scale"] = cauchy_scale;
  j["huber_scale"] = huber_scale;
  j["elevation_weighting"] = elevation_weighting;
  j["classifier_model"] = classifier_model;
  j["output_dir"] = output_dir;
  j["qc_pv"] = {hp.qc_pv.x(), hp.qc_pv.y(), hp.qc_pv.z()};
  j["qc_clk"] = hp.qc_clk;
  nlohmann::json v;
  v["window_capacity"] = vb.window_capacity;
  v["refresh_every"] = vb.refresh_every;
  v["min_samples"] = vb.min_samples;
  v["k_max"] = vb.k_max;
  v["max_iters"] = vb.max_iters;
  v["weight_floor"] = vb.weight_floor;
  v["fallback_sigma"] = vb.fallback_sigma;
  v["scope"] = vb.scope == WindowScope::pooled ? "pooled" : "per_satellite";
  v["prior"] = {{"alpha0", vb.prior.alpha0},
                {"beta0", vb.prior.beta0},
                {"m0", vb.prior.m0},
                {"a0", vb.prior.a0},
                {"rte0", vb.prior.rte0}};
  j["vb"] = v;
  return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  RunConfig c;
  c.scenario_dir = j.at("scenario");
  c.noise_model = noise_treatment_from_name(j.value("noise_model", "gaussian"));
  c.screening = screening_mode_from_name(j.value("screening", "off"));
  c.knot_rate = j.value("knot_rate", c.knot_rate);
  c.window_span = j.value("window_span", c.window_span);
  c.pr_sigma = j.value("pr_sigma", c.pr_sigma);
  c.cauchy_scale = j.value("cauchy_scale", c.cauchy_scale);
  c.huber_scale = j.value("huber_scale", c.huber_scale);
  c.elevation_weighting = j.value("elevation_weighting", false);
  c.classifier_model = j.value("classifier_model", std::string());
  c.output_dir = j.value("output_dir", std::string());
  if (j.contains("qc_pv")) {
    const auto& q = j.at("qc_pv");
    c.hp.qc_pv = Vec3(q.at(0), q.at(1), q.at(2));
  }
  c.hp.qc_clk = j.value("qc_clk", c.hp.qc_clk);
  if (j.contains("vb")) {
    const auto& v = j.at("vb");
    c.vb.window_capacity = v.value("window_capacity", c.vb.window_capacity);
    c.vb.refresh_every = v.value("refresh_every", c.vb.refresh_every);
    c.vb.min_samples = v.value("min_samples", c.vb.min_samples);
    c.vb.k_max = v.value("k_max", c.vb.k_max);
    c.vb.max_iters = v.value("max_iters", c.vb.max_iters);
    c.vb.weight_floor = v.value("weight_floor", c.vb.weight_floor);
    c.vb.fallback_sigma = v.value("fallback_sigma", c.vb.fallback_sigma);
    if (v.contains("scope"))
      c.vb.scope = v.at("scope") == "per_satellite" ? WindowScope::per_satellite
                                                    : WindowScope::pooled;
    if (v.contains("prior")) {
      const auto& p = v.at("prior");
      c.vb.prior.alpha0 = p.value("alpha0", c.vb.prior.alpha0);
      c.vb.prior.beta0 = p.value("beta0", c.vb.prior.beta0);
      c.vb.prior.m0 = p.value("m0", c.vb.prior.m0);
      c.vb.prior.a0 = p.value("a0", c.vb.prior.a0);
      c.vb.prior.rte0 = p.value("rte0", c.vb.prior.rte0);
    }
  }
  return c;
}

namespace {

// Single-epoch point solution for position and clock bias; robust enough to
// bootstrap the graph prior in contaminated epochs.
StateKnot spp_solve(const std::vector<SatObservation>& obs, Vec3 p0, double b0) {
  Vec3 p = p0;
  double b = b0;
  // IRLS with a staged kernel scale: wide passes find the consensus set,
  // narrow passes converge on it
  for (int iter = 0; iter < 36; ++iter) {
    const double scale = iter < 12 ? 5.0 : (iter < 24 ? 2.0 : 0.8);
    Eigen::Matrix4d h = 1e-9 * Eigen::Matrix4d::Identity();
    Eigen::Vector4d g = Eigen::Vector4d::Zero();
    for (const auto& o : obs) {
      const Vec3 diff = o.sat_pos - p;
      const double range = diff.norm();
      if (range <= 1.0) continue;
      const Vec3 u = diff / range;
      const double e = o.rho - (range + b);
      Eigen::Vector4d jac;
      jac << u.x(), u.y(), u.z(), -1.0;
      const double w = mestimator_weight(Kernel::cauchy, scale, e / 5.0);
      h += w * jac * jac.transpose();
      g += w * jac * e;
    }
    const Eigen::Vector4d delta = h.ldlt().solve(-g);
    if (!delta.allFinite()) break;
    p += delta.head<3>();
    b += delta(3);
    if (delta.norm() < 1e-8 && iter >= 24) break;
  }
  StateKnot s;
  s.p = p;
  s.b = b;
  return s;
}

struct EpochTiming {
  std::chrono::steady_clock::time_point begin;
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - begin)
        .count();
  }
};

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (const double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (const double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

std::vector<LabeledSample> build_training_dataset(const Dataset& dataset) {
  std::vector<LabeledSample> out;
  FeatureHistory history;
  std::optional<StateKnot> prev;
  Vec3 prev_vel = Vec3::Zero();
  for (const auto& epoch : dataset.epochs) {
    if (epoch.observations.empty()) continue;
    StateKnot prior;
    if (prev) {
      const double dt = epoch.t - prev->t;
      prior = *prev;
      prior.t = epoch.t;
      prior.p += prev_vel * dt;
      prior.b += prev->d * dt;
    } else {
      prior = spp_solve(epoch.observations, Vec3::Zero(), 0.0);
      prior.t = epoch.t;
    }
    const auto feats = extract_features(epoch.observations, prior, history);
    for (size_t i = 0; i < epoch.observations.size(); ++i) {
      const auto& o = epoch.observations[i];
      if (!o.los_truth.has_value())
        throw std::invalid_argument(
            "build_training_dataset: observations carry no truth labels");
      out.push_back({feats[i], !*o.los_truth});
    }
    StateKnot cur = spp_solve(epoch.observations, prior.p, prior.b);
    cur.t = epoch.t;
    if (prev && epoch.t > prev->t) {
      prev_vel = (cur.p - prev->p) / (epoch.t - prev->t);
      cur.d = (cur.b - prev->b) / (epoch.t - prev->t);
    }
    prev = cur;
  }
  return out;
}

ClassifierModel train_default_classifier(const ScenarioConfig& scenario) {
  ScenarioConfig training = scenario;
  training.seed = scenario.seed + 9001;
  const Dataset ds = simulate(training);
  return train(build_training_dataset(ds));
}

MetricsReport run(const RunConfig& config) {
  const Dataset ds = load_dataset(config.scenario_dir);
  if (ds.epochs.empty()) throw std::runtime_error("run: empty scenario");
  const int n_epochs = static_cast<int>(ds.epochs.size());

  MetricsReport report;
  report.scenario_dir = config.scenario_dir;
  report.noise_model = config.noise_model;
  report.screening = config.screening;
  report.epochs = n_epochs;

  ClassifierModel classifier;
  if (config.screening == ScreeningMode::baseline) {
    if (!config.classifier_model.empty()) {
      std::ifstream in(config.classifier_model);
      if (!in)
        throw std::runtime_error("run: cannot open classifier model " +
                                 config.classifier_model);
      std::string text((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
      classifier = ClassifierModel::deserialize(text);
    } else {
      classifier = train_default_classifier(ds.config);
    }
  }

  const bool is_gmm = config.noise_model == NoiseTreatment::gmm_shift ||
                      config.noise_model == NoiseTreatment::gmm_naive;
  OnlineGmmConfig vbcfg = config.vb;
  vbcfg.shift_elimination = config.noise_model == NoiseTreatment::gmm_shift;
  if (vbcfg.fallback_sigma <= 0.0) vbcfg.fallback_sigma = config.pr_sigma;
  OnlineGmm online(vbcfg);

  const double t0 = ds.epochs.front().t;
  const double knot_dt = 1.0 / config.knot_rate;
  const double tol = 1e-3;
  auto knot_time = [&](long k) { return t0 + k * knot_dt; };

  std::map<long, StateKnot> estimates;
  std::vector<std::vector<SatObservation>> kept_per_epoch(n_epochs);
  FeatureHistory feat_history;
  PriorPayload first_prior;
  Vec8 roll_sigma;
  roll_sigma << 20.0, 5.0, 20.0, 5.0, 20.0, 5.0, 50.0, 5.0;

  auto pr_noise_for = [&](const SatObservation& obs) -> NoiseModel {
    NoiseModel n;
    switch (config.noise_model) {
      case NoiseTreatment::gaussian:
        n = NoiseModel::Gaussian(config.pr_sigma);
        break;
      case NoiseTreatment::cauchy:
        n = NoiseModel::MEstimator(Kernel::cauchy, config.cauchy_scale,
                                   config.pr_sigma);
        break;
      case NoiseTreatment::huber:
        n = NoiseModel::MEstimator(Kernel::huber, config.huber_scale,
                                   config.pr_sigma);
        break;
      case NoiseTreatment::gmm_shift:
      case NoiseTreatment::gmm_naive:
        n = NoiseModel::Gmm(online.model(obs.sat_id));
        break;
    }
    n.elevation_weighting = config.elevation_weighting;
    return n;
  };

  // latest estimate propagated to time t
  auto predicted_state = [&](double t) -> StateKnot {
    if (estimates.empty()) {
      StateKnot s = spp_solve(ds.epochs.front().observations, Vec3::Zero(), 0.0);
      s.t = t;
      return s;
    }
    const StateKnot& base = estimates.rbegin()->second;
    const double dt = t - base.t;
    if (dt <= 0.0) return base;
    return StateKnot::from_vector(t, transition(dt) * base.vector());
  };

  std::vector<long> per_epoch_excluded(n_epochs, 0);

  for (int ei = 0; ei < n_epochs; ++ei) {
    const auto& epoch = ds.epochs[ei];

    // 1. screening
    std::vector<SatObservation> kept;
    switch (config.screening) {
      case ScreeningMode::off:
        kept = epoch.observations;
        break;
      case ScreeningMode::oracle: {
        for (const auto& o : epoch.observations)
          if (o.los_truth.value_or(true)) kept.push_back(o);
        per_epoch_excluded[ei] =
            static_cast<long>(epoch.observations.size() - kept.size());
        break;
      }
      case ScreeningMode::baseline: {
        if (epoch.observations.empty()) break;
        const StateKnot prior_state = predicted_state(epoch.t);
        const auto feats =
            extract_features(epoch.observations, prior_state, feat_history);
        std::vector<Prediction> preds(feats.size());
        for (size_t i = 0; i < feats.size(); ++i)
          preds[i] = predict(classifier, feats[i]);
        const ScreenResult res = screen_epoch(epoch.observations, preds);
        kept = res.kept;
        per_epoch_excluded[ei] = static_cast<long>(res.excluded.size());
        report.retained_under_protest +=
            static_cast<long>(res.retained_under_protest.size());
        break;
      }
    }
    report.excluded_total += per_epoch_excluded[ei];
    kept_per_epoch[ei] = kept;

    // 2. knot window
    const long k_hi = std::max<long>(
        0, static_cast<long>(std::ceil((epoch.t - t0) * config.knot_rate - 1e-9)));
    const long k_lo = std::max<long>(
        0, k_hi - static_cast<long>(std::lround(config.window_span * config.knot_rate)));
    std::vector<double> times;
    for (long k = k_lo; k <= k_hi; ++k) times.push_back(knot_time(k));

    // 3. initialize knots
    if (estimates.empty()) {
      StateKnot s0 = spp_solve(kept.size() >= 4 ? kept : epoch.observations,
                               Vec3::Zero(), 0.0);
      s0.t = knot_time(0);
      estimates[0] = s0;
      first_prior.mean = s0;
      first_prior.sigma << 50.0, 10.0, 50.0, 10.0, 50.0, 10.0, 100.0, 10.0;
    }
    for (long k = k_lo; k <= k_hi; ++k) {
      if (estimates.count(k)) continue;
      auto it = estimates.lower_bound(k);
      if (it == estimates.begin() && it->first > k) {
        estimates[k] = StateKnot::from_vector(knot_time(k), it->second.vector());
        continue;
      }
      if (it == estimates.end() || it->first > k) --it;
      const StateKnot& base = it->second;
      estimates[k] = StateKnot::from_vector(
          knot_time(k), transition(knot_time(k) - base.t) * base.vector());
    }

    // 4. factors within the window
    std::vector<Factor> meas;
    for (int ej = 0; ej <= ei; ++ej) {
      const double tj = ds.epochs[ej].t;
      if (tj < times.front() - tol || tj > times.back() + tol) continue;
      for (const auto& o : kept_per_epoch[ej])
        meas.push_back(Factor::Pseudorange(o, pr_noise_for(o)));
      const auto& odo = ds.epochs[ej].odometry;
      if (odo && odo->t_i >= times.front() - tol && odo->t_j <= times.back() + tol)
        meas.push_back(Factor::Odometry(*odo));
    }

    GraphConfig gc;
    gc.hp = config.hp;
    gc.alignment_tol = tol;
    if (k_lo == 0) {
      gc.prior = first_prior;
    } else {
      gc.prior.mean = estimates.at(k_lo);
      gc.prior.sigma = roll_sigma;
    }

    std::vector<StateKnot> init;
    init.reserve(times.size());
    for (long k = k_lo; k <= k_hi; ++k) init.push_back(estimates.at(k));

    // 5. solve, timed per epoch
    EpochTiming timing{std::chrono::steady_clock::now()};
    bool failed = false;
    try {
      const FactorGraph graph = build_graph(times, meas, gc);
      const bool robust_kernel = config.noise_model == NoiseTreatment::cauchy ||
                                 config.noise_model == NoiseTreatment::huber;
      if (ei == 0 && robust_kernel) {
        // coarse gaussian pre-solve to settle the bootstrap window
        std::vector<Factor> meas_g;
        for (const auto& m : meas) {
          Factor f = m;
          if (f.kind == FactorKind::pseudorange)
            f.noise = NoiseModel::Gaussian(config.pr_sigma);
          meas_g.push_back(f);
        }
        const FactorGraph graph_g = build_graph(times, meas_g, gc);
        auto [sol_g, rep_g] = solve(graph_g, init, config.solve_options);
        init = sol_g;
      }
      auto [sol, rep] = solve(graph, init, config.solve_options);
      for (size_t i = 0; i < times.size(); ++i)
        estimates[k_lo + static_cast<long>(i)] = sol[i];
    } catch (const std::exception&) {
      failed = true;
      ++report.failed_epochs;
    }
    (void)failed;

    // 6. error at epoch time
    StateKnot est;
    const long k_at = std::lround((epoch.t - t0) * config.knot_rate);
    if (std::fabs(knot_time(k_at) - epoch.t) <= tol && estimates.count(k_at)) {
      est = estimates.at(k_at);
    } else {
      const long k_left = static_cast<long>(std::floor((epoch.t - t0) * config.knot_rate));
      const StateKnot& a = estimates.at(std::max(k_lo, k_left));
      const StateKnot& b = estimates.at(std::min(k_hi, k_left + 1));
      est = b.t > a.t ? interpolate(a, b, epoch.t, config.hp) : a;
    }
    report.per_epoch_error2d.push_back((est.p - epoch.truth.p).head<2>().norm());

    // 7. residual feed for the online mixture; model upkeep is part of the
    // per-epoch estimation cost of the gmm treatments
    if (is_gmm) {
      std::vector<ResidualSample> samples;
      samples.reserve(kept.size());
      for (const auto& o : kept)
        samples.push_back({o.t, o.sat_id, pseudorange_residual(est, o)});
      online.on_epoch(ei, samples);
    }
    report.per_epoch_ms.push_back(timing.ms());
  }

  report.mean_2d = mean_of(report.per_epoch_error2d);
  report.std_2d = std_of(report.per_epoch_error2d);
  report.mean_ms = mean_of(report.per_epoch_ms);
  report.std_ms = std_of(report.per_epoch_ms);
  report.snapshots = online.snapshots();

  if (!config.output_dir.empty()) {
    namespace fs = std::filesystem;
    const std::string dir = resolve_output_dir(config.output_dir);
    fs::create_directories(dir);
    {
      std::ofstream out(fs::path(dir) / "report.json");
      out << report.to_json() << '\n';
    }
    {
      std::ofstream out(fs::path(dir) / "epochs.csv");
      out << "epoch,t,error_2d,solve_ms,excluded\n";
      for (int ei = 0; ei < n_epochs; ++ei)
        out << ei << ',' << fmt_double(ds.epochs[ei].t) << ','
            << fmt_double(report.per_epoch_error2d[ei]) << ','
            << fmt_double(report.per_epoch_ms[ei]) << ','
            << per_epoch_excluded[ei] << '\n';
    }
    if (is_gmm) {
      std::ofstream out(fs::path(dir) / "gmm_model.txt");
      out << online.serialize();
      if (vbcfg.scope == WindowScope::pooled) {
        std::ofstream snap(fs::path(dir) / "gmm_snapshots.csv");
        snap << online.snapshots_csv();
      } else {
        std::map<int, std::vector<const GmmSnapshot*>> by_sat;
        for (const auto& s : online.snapshots()) by_sat[s.sat_id].push_back(&s);
        for (const auto& [sat, snaps] : by_sat) {
          std::ofstream snap(fs::path(dir) /
                             ("gmm_snapshots_sat_" + std::to_string(sat) + ".csv"));
          snap << "epoch,component,weight,mean,variance\n";
          for (const auto* s : snaps)
            for (int k = 0; k < s->model.K(); ++k) {
              const auto& c = s->model.comps[k];
              snap << s->epoch << ',' << k << ',' << fmt_double(c.w) << ','
                   << fmt_double(c.mu) << ',' << fmt_double(c.var) << '\n';
            }
        }
      }
    }
    if (config.screening == ScreeningMode::baseline &&
        config.classifier_model.empty()) {
      std::ofstream out(fs::path(dir) / "classifier.txt");
      out << classifier.serialize();
    }
  }
  return report;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario_dir;
  j["noise_model"] = noise_treatment_name(noise_model);
  j["screening"] = screening_mode_name(screening);
  j["epochs"] = epochs;
  j["failed_epochs"] = failed_epochs;
  j["mean_2d"] = mean_2d;
  j["std_2d"] = std_2d;
  j["mean_ms"] = mean_ms;
  j["std_ms"] = std_ms;
  j["excluded_total"] = excluded_total;
  j["retained_under_protest"] = retained_under_protest;
  j["per_epoch_error2d"] = per_epoch_error2d;
  return j.dump(2);
}

Comparison compare(const std::vector<RunConfig>& configs) {
  if (configs.empty()) throw std::invalid_argument("compare: no configs");
  for (const auto& c : configs)
    if (c.scenario_dir != configs.front().scenario_dir)
      throw std::invalid_argument("compare: configs reference mixed scenarios");

  Comparison cmp;
  for (const auto& c : configs) {
    const MetricsReport r = run(c);
    ComparisonRow row;
    row.model = noise_treatment_name(c.noise_model);
    if (c.screening != ScreeningMode::off)
      row.model += std::string("+") + screening_mode_name(c.screening);
    row.mean_2d = r.mean_2d;
    row.std_2d = r.std_2d;
    row.mean_ms = r.mean_ms;
    row.std_ms = r.std_ms;
    cmp.rows.push_back(row);
  }
  std::sort(cmp.rows.begin(), cmp.rows.end(),
            [](const ComparisonRow& a, const ComparisonRow& b) {
              return a.mean_2d < b.mean_2d;
            });
  for (size_t i = 0; i < cmp.rows.size(); ++i)
    for (size_t j = i + 1; j < cmp.rows.size(); ++j) {
      const auto& better = cmp.rows[i];
      const auto& worse = cmp.rows[j];
      if (worse.mean_2d <= 0.0) continue;
      cmp.improvements.push_back(
          {better.model, worse.model,
           (worse.mean_2d - better.mean_2d) / worse.mean_2d * 100.0});
    }
  return cmp;
}

std::string Comparison::to_csv() const {
  std::ostringstream os;
  os << "model,mean_2d,std_2d,mean_ms,std_ms\n";
  for (const auto& r : rows)
    os << r.model << ',' << fmt_double(r.mean_2d) << ',' << fmt_double(r.std_2d)
       << ',' << fmt_double(r.mean_ms) << ',' << fmt_double(r.std_ms) << '\n';
  return os.str();
}

std::string Comparison::to_text() const {
  std::ostringstream os;
  char buf[160];
  os << "Noise Model          2D Error (m)           Computation Time (ms)\n";
  os << "                     mean       std         mean       std\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-20s %-10.3f %-11.3f %-10.3f %-10.3f\n",
                  r.model.c_str(), r.mean_2d, r.std_2d, r.mean_ms, r.std_ms);
    os << buf;
  }
  if (!improvements.empty()) os << "\n";
  for (const auto& imp : improvements) {
    std::snprintf(buf, sizeof(buf), "%s improves mean 2D error by %.1f%% over %s\n",
                  imp.better.c_str(), imp.percent, imp.worse.c_str());
    os << buf;
  }
  return os.str();
}

std::string export_density(const std::vector<GmmSnapshot>& snapshots,
                           double lo, double hi, int points) {
  if (snapshots.empty())
    throw std::invalid_argument("export_density: no snapshots");
  if (points < 2) throw std::invalid_argument("export_density: need >= 2 points");
  std::ostringstream os;
  os << "epoch,r,density\n";
  for (const auto& snap : snapshots) {
    double a = lo, b = hi;
    if (a == b) {
      a = std::numeric_limits<double>::infinity();
      b = -std::numeric_limits<double>::infinity();
      for (const auto& c : snap.model.comps) {
        const double s = std::sqrt(c.var);
        a = std::min(a, c.mu - 8.0 * s);
        b = std::max(b, c.mu + 8.0 * s);
      }
    }
    for (int i = 0; i < points; ++i) {
      const double r = a + (b - a) * i / (points - 1);
      const double density = std::exp(-gmm_nll(snap.model, r));
      os << snap.epoch << ',' << fmt_double(r) << ',' << fmt_double(density)
         << '\n';
    }
  }
  return os.str();
}

std::vector<GmmSnapshot> snapshots_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("snapshots csv: empty");
  std::vector<GmmSnapshot> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw std::runtime_error("snapshots csv: bad row");
    const long epoch = std::stol(f[0]);
    if (out.empty() || out.back().epoch != epoch) {
      GmmSnapshot snap;
      snap.epoch = epoch;
      out.push_back(snap);
    }
    GmmComponent c;
    c.w = std::stod(f[2]);
    c.mu = std::stod(f[3]);
    c.var = std::stod(f[4]);
    c.m = c.mu;
    out.back().model.comps.push_back(c);
  }
  return out;
}

}  // namespace ctfgo
