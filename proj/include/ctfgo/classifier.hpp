#pragma once

#include <string>
#include <vector>

#include "ctfgo/nlos_features.hpp"

namespace ctfgo {

/// Logistic NLOS classifier over standardized features. Stands behind the
/// same interface an externally trained model would load through.
struct ClassifierModel {
  Eigen::VectorXd weights;      // per feature
  double bias = 0.0;
  Eigen::VectorXd feat_mean;    // standardization
  Eigen::VectorXd feat_scale;   // > 0
  double threshold = 0.5;

  static ClassifierModel untrained(int dim = SatFeatureVector::kDim);

  std::string serialize() const;
  static ClassifierModel deserialize(const std::string& text);
};

struct TrainOptions {
  double l2 = 1e-4;
  double loss_tol = 1e-8;
  int max_steps = 10000;
};

struct LabeledSample {
  SatFeatureVector features;
  bool is_nlos = false;
};

/// Logistic regression by gradient descent with a backtracking step rule;
/// the training loss never increases. Requires both classes present.
ClassifierModel train(const std::vector<LabeledSample>& dataset,
                      const TrainOptions& options = {});

struct Prediction {
  double probability = 0.5;
  bool is_nlos = false;
};

Prediction predict(const ClassifierModel& model, const SatFeatureVector& x);

/// Labeled-dataset CSV: one row per (epoch, satellite) with features + label.
std::string dataset_to_csv(const std::vector<LabeledSample>& dataset);
std::vector<LabeledSample> dataset_from_csv(const std::string& text);

}  // namespace ctfgo
