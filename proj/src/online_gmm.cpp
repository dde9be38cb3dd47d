#include "ctfgo/online_gmm.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "ctfgo/csv.hpp"

namespace ctfgo {

std::optional<GmmModel> refresh_policy(const std::vector<double>& samples,
                                       long epoch_index,
                                       const OnlineGmmConfig& config,
                                       bool* fit_skipped) {
  if (fit_skipped) *fit_skipped = false;
  if (config.refresh_every <= 0) return std::nullopt;
  if (epoch_index % config.refresh_every != 0) return std::nullopt;
  if (static_cast<int>(samples.size()) < config.min_samples) return std::nullopt;
  try {
    VbFitResult fit = vb_fit(samples, config.prior, config.k_max,
                             config.max_iters);
    GmmModel model = prune(fit.model, config.weight_floor);
    if (config.shift_elimination) model = eliminate_shift(model);
    return model;
  } catch (const std::exception&) {
    if (fit_skipped) *fit_skipped = true;  // model kept, fit skipped
    return std::nullopt;
  }
}

OnlineGmm::OnlineGmm(const OnlineGmmConfig& config)
    : config_(config),
      window_(static_cast<std::size_t>(std::max(1, config.window_capacity)),
              config.scope),
      fallback_(GmmModel::single(0.0, config.fallback_sigma * config.fallback_sigma)) {}

bool OnlineGmm::on_epoch(long epoch_index,
                         const std::vector<ResidualSample>& residuals) {
  window_.push_epoch(residuals);
  bool refit = false;
  if (config_.scope == WindowScope::pooled) {
    bool skipped = false;
    if (auto model = refresh_policy(window_.values(), epoch_index, config_, &skipped)) {
      models_[-1] = *model;
      snapshots_.push_back({epoch_index, -1, *model});
      last_fit_epoch_ = epoch_index;
      refit = true;
    }
    if (skipped) ++fits_skipped_;
  } else {
    for (const int sat : window_.satellite_ids()) {
      bool skipped = false;
      if (auto model =
              refresh_policy(window_.values(sat), epoch_index, config_, &skipped)) {
        models_[sat] = *model;
        snapshots_.push_back({epoch_index, sat, *model});
        last_fit_epoch_ = epoch_index;
        refit = true;
      }
      if (skipped) ++fits_skipped_;
    }
  }
  return refit;
}

const GmmModel& OnlineGmm::model(int sat_id) const {
  const int key = config_.scope == WindowScope::pooled ? -1 : sat_id;
  const auto it = models_.find(key);
  return it == models_.end() ? fallback_ : it->second;
}

bool OnlineGmm::has_fit(int sat_id) const {
  const int key = config_.scope == WindowScope::pooled ? -1 : sat_id;
  return models_.count(key) > 0;
}

std::string OnlineGmm::serialize() const {
  std::ostringstream os;
  os << "ctfgo-gmm-state v1\n";
  os << "scope " << (config_.scope == WindowScope::pooled ? "pooled" : "per_satellite")
     << "\n";
  os << "fit_epoch " << last_fit_epoch_ << "\n";
  os << "fallback_sigma " << fmt_double(config_.fallback_sigma) << "\n";
  os << "models " << models_.size() << "\n";
  for (const auto& [key, model] : models_) {
    os << "model " << key << " K " << model.K() << "\n";
    for (const auto& c : model.comps)
      os << "comp " << fmt_double(c.w) << ' ' << fmt_double(c.mu) << ' '
         << fmt_double(c.var) << ' ' << fmt_double(c.alpha) << ' '
         << fmt_double(c.beta) << ' ' << fmt_double(c.m) << ' '
         << fmt_double(c.a) << ' ' << fmt_double(c.rte) << "\n";
  }
  return os.str();
}

OnlineGmm OnlineGmm::deserialize(const std::string& text) {
  std::istringstream is(text);
  std::string line, word;
  if (!std::getline(is, line) || line.rfind("ctfgo-gmm-state", 0) != 0)
    throw std::runtime_error("gmm state: bad header");

  OnlineGmmConfig config;
  long fit_epoch = -1;
  std::size_t n_models = 0;
  {
    std::string scope_word;
    is >> word >> scope_word;
    config.scope =
        scope_word == "per_satellite" ? WindowScope::per_satellite : WindowScope::pooled;
    is >> word >> fit_epoch;
    is >> word >> config.fallback_sigma;
    is >> word >> n_models;
  }
  OnlineGmm out(config);
  out.last_fit_epoch_ = fit_epoch;
  for (std::size_t i = 0; i < n_models; ++i) {
    int key = 0, k = 0;
    is >> word >> key >> word >> k;
    GmmModel model;
    for (int j = 0; j < k; ++j) {
      GmmComponent c;
      is >> word >> c.w >> c.mu >> c.var >> c.alpha >> c.beta >> c.m >> c.a >> c.rte;
      model.comps.push_back(c);
    }
    if (!is) throw std::runtime_error("gmm state: truncated model block");
    out.models_[key] = std::move(model);
  }
  return out;
}

std::string OnlineGmm::snapshots_csv() const {
  std::ostringstream os;
  os << "epoch,component,weight,mean,variance\n";
  for (const auto& snap : snapshots_)
    for (int k = 0; k < snap.model.K(); ++k) {
      const auto& c = snap.model.comps[k];
      os << snap.epoch << ',' << k << ',' << fmt_double(c.w) << ','
         << fmt_double(c.mu) << ',' << fmt_double(c.var) << '\n';
    }
  return os.str();
}

}  // namespace ctfgo
