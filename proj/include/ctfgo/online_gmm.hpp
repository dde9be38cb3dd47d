#pragma once

#include <optional>
#include <string>

#include "ctfgo/residual_window.hpp"
#include "ctfgo/vb_gmm.hpp"

namespace ctfgo {

struct OnlineGmmConfig {
  int window_capacity = 1000;
  int refresh_every = 10;    // epochs between refits; 0 disables refitting
  int min_samples = 200;     // window fill required before the first/any fit
  int k_max = 5;
  int max_iters = 150;
  double weight_floor = 0.01;
  double fallback_sigma = 5.0;  // single-component model before the first fit
  bool shift_elimination = true;
  WindowScope scope = WindowScope::pooled;
  VbPrior prior;
};

/// Refit decision for one buffer of samples: returns a new model when
/// epoch_index is a refresh multiple and the buffer holds enough samples,
/// otherwise nothing (keep the previous model). Fit failures are reported as
/// "kept" via the skipped flag rather than thrown.
std::optional<GmmModel> refresh_policy(const std::vector<double>& samples,
                                       long epoch_index,
                                       const OnlineGmmConfig& config,
                                       bool* fit_skipped = nullptr);

struct GmmSnapshot {
  long epoch = 0;
  int sat_id = -1;  // -1 for pooled scope
  GmmModel model;
};

/// Single-writer online state: pushes post-fit residuals per epoch and
/// maintains the current mixture model(s) under the refresh policy.
class OnlineGmm {
 public:
  explicit OnlineGmm(const OnlineGmmConfig& config = {});

  /// Pushes one epoch of residuals and refits when the policy says so.
  /// Returns true if any model was refit at this epoch.
  bool on_epoch(long epoch_index, const std::vector<ResidualSample>& residuals);

  /// Current model for a satellite (the pooled model in pooled scope;
  /// the fallback Gaussian before the first fit).
  const GmmModel& model(int sat_id = -1) const;

  bool has_fit(int sat_id = -1) const;
  const ResidualWindow& window() const { return window_; }
  const std::vector<GmmSnapshot>& snapshots() const { return snapshots_; }
  int fits_skipped() const { return fits_skipped_; }
  long last_fit_epoch() const { return last_fit_epoch_; }
  const OnlineGmmConfig& config() const { return config_; }

  /// Plain-text persistence of models, window scope, and fit epoch.
  std::string serialize() const;
  static OnlineGmm deserialize(const std::string& text);

  /// CSV rows "epoch,component,weight,mean,variance" over all snapshots.
  std::string snapshots_csv() const;

 private:
  GmmModel fit_buffer(const std::vector<double>& samples, bool* skipped);

  OnlineGmmConfig config_;
  ResidualWindow window_;
  GmmModel fallback_;
  std::map<int, GmmModel> models_;  // key -1 = pooled
  std::vector<GmmSnapshot> snapshots_;
  int fits_skipped_ = 0;
  long last_fit_epoch_ = -1;
};

}  // namespace ctfgo
