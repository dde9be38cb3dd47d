#include "ctfgo/screening.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ctfgo;

namespace {

SatObservation obs_with_cn0(double cn0, int sat_id, double rho_extra = 0.0) {
  SatObservation o;
  o.sat_id = sat_id;
  o.sat_pos = Vec3(2.6e7, 0, 0);
  o.rho = 2.6e7 + rho_extra;
  o.cn0 = cn0;
  o.elevation = 0.5;
  return o;
}

std::vector<LabeledSample> separable_dataset(int n_per_class) {
  // 1-D separable in cn0: LOS at 45, NLOS at 30
  std::vector<LabeledSample> out;
  std::mt19937 gen(4);
  std::uniform_real_distribution<double> jitter(-2.0, 2.0);
  for (int i = 0; i < n_per_class; ++i) {
    LabeledSample los;
    los.features.cn0 = 45.0 + jitter(gen);
    los.features.elevation = 0.8;
    los.is_nlos = false;
    out.push_back(los);
    LabeledSample nlos;
    nlos.features.cn0 = 30.0 + jitter(gen);
    nlos.features.elevation = 0.8;
    nlos.is_nlos = true;
    out.push_back(nlos);
  }
  return out;
}

}  // namespace

TEST(ExtractFeatures, SingleSatelliteEpoch) {
  FeatureHistory hist;
  StateKnot prior;
  const auto f = extract_features({obs_with_cn0(42.0, 3)}, prior, hist);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_DOUBLE_EQ(f[0].cn0_epoch_std, 0.0);
  EXPECT_DOUBLE_EQ(f[0].cn0_delta, 0.0);
  EXPECT_DOUBLE_EQ(f[0].sat_count, 1.0);
}

TEST(ExtractFeatures, EpochStatisticsPopulationConvention) {
  FeatureHistory hist;
  StateKnot prior;
  const auto f = extract_features({obs_with_cn0(40.0, 1), obs_with_cn0(50.0, 2)},
                                  prior, hist);
  EXPECT_DOUBLE_EQ(f[0].cn0_epoch_mean, 45.0);
  EXPECT_DOUBLE_EQ(f[0].cn0_epoch_std, 5.0);
}

TEST(ExtractFeatures, TemporalDelta) {
  FeatureHistory hist;
  StateKnot prior;
  extract_features({obs_with_cn0(45.0, 9)}, prior, hist);
  const auto f = extract_features({obs_with_cn0(40.0, 9)}, prior, hist);
  EXPECT_DOUBLE_EQ(f[0].cn0_delta, -5.0);
}

TEST(ExtractFeatures, ResidualPriorReflectsRangeError) {
  FeatureHistory hist;
  StateKnot prior;
  const auto f = extract_features({obs_with_cn0(45.0, 1, 25.0)}, prior, hist);
  EXPECT_NEAR(f[0].residual_prior, 25.0, 1e-9);
}

TEST(ExtractFeatures, EmptyEpochRejected) {
  FeatureHistory hist;
  StateKnot prior;
  EXPECT_THROW(extract_features({}, prior, hist), std::invalid_argument);
}

TEST(Train, SeparableToyReachesPerfectAccuracy) {
  const auto data = separable_dataset(100);
  const auto model = train(data);
  int correct = 0;
  for (const auto& s : data)
    correct += predict(model, s.features).is_nlos == s.is_nlos ? 1 : 0;
  EXPECT_EQ(correct, static_cast<int>(data.size()));
}

TEST(Train, ZeroIterationsGivesUninformativeModel) {
  TrainOptions opt;
  opt.max_steps = 0;
  const auto model = train(separable_dataset(20), opt);
  EXPECT_DOUBLE_EQ(model.weights.norm(), 0.0);
  SatFeatureVector x;
  x.cn0 = 37.0;
  EXPECT_DOUBLE_EQ(predict(model, x).probability, 0.5);
}

TEST(Train, DuplicatedDatasetYieldsIdenticalModel) {
  const auto data = separable_dataset(60);
  std::vector<LabeledSample> doubled = data;
  doubled.insert(doubled.end(), data.begin(), data.end());
  const auto a = train(data);
  const auto b = train(doubled);
  EXPECT_LT((a.weights - b.weights).norm(), 1e-9);
  EXPECT_NEAR(a.bias, b.bias, 1e-9);
}

TEST(Train, SingleClassRejected) {
  std::vector<LabeledSample> data(10);
  EXPECT_THROW(train(data), std::invalid_argument);
}

TEST(Train, StandardizationIdempotence) {
  const auto raw = separable_dataset(80);
  const auto model_raw = train(raw);
  // pre-standardize with the learned statistics; retraining must make the
  // same decisions through an identity standardization
  std::vector<LabeledSample> standardized = raw;
  for (auto& s : standardized) {
    const Eigen::VectorXd z =
        (s.features.vector() - model_raw.feat_mean).cwiseQuotient(model_raw.feat_scale);
    s.features.cn0 = z(0);
    s.features.elevation = z(1);
    s.features.residual_prior = z(2);
    s.features.cn0_epoch_mean = z(3);
    s.features.cn0_epoch_std = z(4);
    s.features.cn0_delta = z(5);
    s.features.sat_count = z(6);
  }
  const auto model_std = train(standardized);
  for (size_t i = 0; i < raw.size(); ++i)
    EXPECT_EQ(predict(model_raw, raw[i].features).is_nlos,
              predict(model_std, standardized[i].features).is_nlos);
}

TEST(Predict, LargeMarginSaturates) {
  auto model = ClassifierModel::untrained();
  model.weights(0) = 50.0;
  SatFeatureVector x;
  x.cn0 = 10.0;
  EXPECT_GT(predict(model, x).probability, 0.999);
  x.cn0 = -10.0;
  EXPECT_LT(predict(model, x).probability, 0.001);
}

TEST(Predict, ThresholdBoundary) {
  auto model = ClassifierModel::untrained();
  model.bias = std::log(0.49 / 0.51);  // p = 0.49
  SatFeatureVector x;
  EXPECT_NEAR(predict(model, x).probability, 0.49, 1e-12);
  EXPECT_FALSE(predict(model, x).is_nlos);
  model.bias = 0.0;  // p = 0.5 exactly -> flagged at threshold
  EXPECT_TRUE(predict(model, x).is_nlos);
}

TEST(Predict, DimensionMismatchRejected) {
  ClassifierModel broken = ClassifierModel::untrained(3);
  EXPECT_THROW(predict(broken, SatFeatureVector{}), std::invalid_argument);
}

TEST(ClassifierIo, SerializeRoundTrip) {
  const auto model = train(separable_dataset(50));
  const auto restored = ClassifierModel::deserialize(model.serialize());
  EXPECT_LT((model.weights - restored.weights).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(model.bias, restored.bias);
  EXPECT_LT((model.feat_scale - restored.feat_scale).norm(), 1e-15);
}

TEST(ClassifierIo, DatasetCsvRoundTrip) {
  const auto data = separable_dataset(10);
  const auto restored = dataset_from_csv(dataset_to_csv(data));
  ASSERT_EQ(restored.size(), data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    EXPECT_DOUBLE_EQ(restored[i].features.cn0, data[i].features.cn0);
    EXPECT_EQ(restored[i].is_nlos, data[i].is_nlos);
  }
}

TEST(ScreenEpoch, NoFlagsKeepsAll) {
  std::vector<SatObservation> epoch;
  std::vector<Prediction> preds;
  for (int i = 0; i < 6; ++i) {
    epoch.push_back(obs_with_cn0(45, i));
    preds.push_back({0.1, false});
  }
  const auto res = screen_epoch(epoch, preds);
  EXPECT_EQ(res.kept.size(), 6u);
  EXPECT_TRUE(res.excluded.empty());
  EXPECT_TRUE(res.retained_under_protest.empty());
}

TEST(ScreenEpoch, RemovesFlagged) {
  std::vector<SatObservation> epoch;
  std::vector<Prediction> preds;
  for (int i = 0; i < 8; ++i) {
    epoch.push_back(obs_with_cn0(45, i));
    preds.push_back({i < 3 ? 0.9 : 0.1, i < 3});
  }
  const auto res = screen_epoch(epoch, preds);
  EXPECT_EQ(res.kept.size(), 5u);
  EXPECT_EQ(res.excluded.size(), 3u);
}

TEST(ScreenEpoch, MinKeepGuardRetainsLowestProbability) {
  std::vector<SatObservation> epoch;
  std::vector<Prediction> preds;
  for (int i = 0; i < 5; ++i) epoch.push_back(obs_with_cn0(45, i));
  preds = {{0.95, true}, {0.60, true}, {0.10, false}, {0.80, true}, {0.70, true}};
  const auto res = screen_epoch(epoch, preds, {4});
  EXPECT_EQ(res.kept.size(), 4u);
  EXPECT_EQ(res.excluded.size(), 1u);
  // the single unflagged one plus the three least suspicious flagged
  EXPECT_EQ(res.retained_under_protest.size(), 3u);
  EXPECT_EQ(res.retained_under_protest[0], 1);  // p=0.60
  EXPECT_EQ(res.retained_under_protest[1], 4);  // p=0.70
  EXPECT_EQ(res.retained_under_protest[2], 3);  // p=0.80
  EXPECT_EQ(res.excluded[0].sat_id, 0);         // p=0.95 stays excluded
}

TEST(ScreenEpoch, NeverBelowMinKeepOrEpochSize) {
  std::vector<SatObservation> epoch = {obs_with_cn0(45, 0), obs_with_cn0(45, 1)};
  std::vector<Prediction> preds = {{0.9, true}, {0.8, true}};
  const auto res = screen_epoch(epoch, preds, {4});
  EXPECT_EQ(res.kept.size(), 2u);  // min(min_keep, epoch size)
}

TEST(ScreenEpoch, ThresholdMonotonicity) {
  const auto model = train(separable_dataset(100));
  std::vector<SatObservation> epoch;
  std::mt19937 gen(10);
  std::uniform_real_distribution<double> cn0(25.0, 50.0);
  for (int i = 0; i < 30; ++i) epoch.push_back(obs_with_cn0(cn0(gen), i));

  FeatureHistory hist;
  StateKnot prior;
  const auto feats = extract_features(epoch, prior, hist);
  size_t prev_excluded = epoch.size() + 1;
  for (double thr = 0.05; thr <= 0.95; thr += 0.05) {
    ClassifierModel m = model;
    m.threshold = thr;
    std::vector<Prediction> preds;
    for (const auto& f : feats) preds.push_back(predict(m, f));
    const auto res = screen_epoch(epoch, preds, {0});
    EXPECT_LE(res.excluded.size(), prev_excluded);
    prev_excluded = res.excluded.size();
  }
}

TEST(ScreenEpoch, MisalignedPredictionsRejected) {
  std::vector<SatObservation> epoch = {obs_with_cn0(45, 0)};
  EXPECT_THROW(screen_epoch(epoch, {}), std::invalid_argument);
}
