#pragma once

#include <string>

#include "ctfgo/online_gmm.hpp"
#include "ctfgo/screening.hpp"
#include "ctfgo/simulator.hpp"
#include "ctfgo/solver.hpp"

namespace ctfgo {

enum class NoiseTreatment { gaussian, cauchy, huber, gmm_shift, gmm_naive };
enum class ScreeningMode { off, baseline, oracle };

const char* noise_treatment_name(NoiseTreatment n);
const char* screening_mode_name(ScreeningMode s);
NoiseTreatment noise_treatment_from_name(const std::string& name);
ScreeningMode screening_mode_from_name(const std::string& name);

struct RunConfig {
  RunConfig() {
    // window sized for the 1 Hz / 20-satellite default stream; the wide
    // fallback keeps the pre-fit phase from chasing NLOS-biased ranges
    vb.window_capacity = 240;
    vb.fallback_sigma = 30.0;
  }

  std::string scenario_dir;
  NoiseTreatment noise_model = NoiseTreatment::gaussian;
  ScreeningMode screening = ScreeningMode::off;
  double knot_rate = 1.0;     // Hz, the a priori chosen state timestamps
  double window_span = 30.0;  // seconds of knots re-optimized per epoch
  double pr_sigma = 5.0;      // m, gaussian / m-estimator whitening
  double cauchy_scale = 1.0;
  double huber_scale = 1.345;
  bool elevation_weighting = false;
  OnlineGmmConfig vb;               // gmm_* treatments
  std::string classifier_model;     // optional model file for baseline screening
  std::string output_dir;
  GpHyperParams hp;
  SolveOptions solve_options;

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
};

struct MetricsReport {
  std::string scenario_dir;
  NoiseTreatment noise_model = NoiseTreatment::gaussian;
  ScreeningMode screening = ScreeningMode::off;
  std::vector<double> per_epoch_error2d;  // meters
  std::vector<double> per_epoch_ms;       // per-epoch solve wall time
  double mean_2d = 0.0, std_2d = 0.0;
  double mean_ms = 0.0, std_ms = 0.0;
  long excluded_total = 0;
  long retained_under_protest = 0;
  int failed_epochs = 0;
  int epochs = 0;
  std::vector<GmmSnapshot> snapshots;

  std::string to_json() const;
};

/// Sliding re-solve over the scenario: knots laid out at knot_rate, each
/// epoch screened, attached, and solved under the configured noise model;
/// gmm treatments feed post-fit residuals into the online mixture.
MetricsReport run(const RunConfig& config);

struct ComparisonRow {
  std::string model;
  double mean_2d = 0.0, std_2d = 0.0;
  double mean_ms = 0.0, std_ms = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;  // ascending mean_2d
  struct Improvement {
    std::string better, worse;
    double percent = 0.0;  // (mean_worse - mean_better) / mean_worse * 100
  };
  std::vector<Improvement> improvements;

  std::string to_csv() const;
  std::string to_text() const;
};

/// Runs each config (all must reference the same scenario) and tabulates
/// mean/std 2D error and per-epoch time plus pairwise improvements.
Comparison compare(const std::vector<RunConfig>& configs);

/// Mixture densities on a uniform grid per snapshot, as CSV
/// "epoch,r,density". Grid spans [lo, hi] with `points` samples; with
/// lo == hi the range is auto-sized to cover all components at +/- 8 sigma.
std::string export_density(const std::vector<GmmSnapshot>& snapshots,
                           double lo = 0.0, double hi = 0.0, int points = 401);

/// Rebuilds snapshots from a "epoch,component,weight,mean,variance" CSV.
std::vector<GmmSnapshot> snapshots_from_csv(const std::string& text);

/// Output root override: relative output paths resolve under this
/// environment variable when it is set.
extern const char* kOutputRootEnv;
std::string resolve_output_dir(const std::string& dir);

/// Feature/label pairs for classifier training, generated from a labeled
/// dataset with a light point-solution prior chain.
std::vector<LabeledSample> build_training_dataset(const Dataset& dataset);

/// The baseline model used when a run config names no classifier file:
/// trained on a sibling scenario with a shifted seed.
ClassifierModel train_default_classifier(const ScenarioConfig& scenario);

}  // namespace ctfgo
