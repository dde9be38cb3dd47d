#include "ctfgo/classifier.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ctfgo/csv.hpp"

namespace ctfgo {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(-m)) without overflow
double softplus_neg(double m) {
  return m >= 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

struct DesignMatrix {
  Eigen::MatrixXd x;  // standardized, n x dim
  Eigen::VectorXd y;  // +1 nlos, -1 los
};

double loss(const DesignMatrix& d, const Eigen::VectorXd& w, double b,
            double l2) {
  const Eigen::VectorXd margins =
      d.y.cwiseProduct(((d.x * w).array() + b).matrix());
  double acc = 0.0;
  for (int i = 0; i < margins.size(); ++i) acc += softplus_neg(margins(i));
  return acc / static_cast<double>(d.x.rows()) + 0.5 * l2 * w.squaredNorm();
}

void gradient(const DesignMatrix& d, const Eigen::VectorXd& w, double b,
              double l2, Eigen::VectorXd& gw, double& gb) {
  const int n = static_cast<int>(d.x.rows());
  Eigen::VectorXd coeff(n);
  for (int i = 0; i < n; ++i) {
    const double m = d.y(i) * (d.x.row(i).dot(w) + b);
    coeff(i) = -d.y(i) * sigmoid(-m);
  }
  gw = d.x.transpose() * coeff / static_cast<double>(n) + l2 * w;
  gb = coeff.sum() / static_cast<double>(n);
}

}  // namespace

ClassifierModel ClassifierModel::untrained(int dim) {
  ClassifierModel m;
  m.weights = Eigen::VectorXd::Zero(dim);
  m.feat_mean = Eigen::VectorXd::Zero(dim);
  m.feat_scale = Eigen::VectorXd::Ones(dim);
  return m;
}

ClassifierModel train(const std::vector<LabeledSample>& dataset,
                      const TrainOptions& options) {
  const int dim = SatFeatureVector::kDim;
  const int n = static_cast<int>(dataset.size());
  int positives = 0;
  for (const auto& s : dataset) positives += s.is_nlos ? 1 : 0;
  if (positives == 0 || positives == n)
    throw std::invalid_argument("train: both classes must be present");

  ClassifierModel model = ClassifierModel::untrained(dim);

  Eigen::MatrixXd raw(n, dim);
  DesignMatrix d;
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    raw.row(i) = dataset[i].features.vector().transpose();
    d.y(i) = dataset[i].is_nlos ? 1.0 : -1.0;
  }
  model.feat_mean = raw.colwise().mean();
  for (int j = 0; j < dim; ++j) {
    const double var =
        (raw.col(j).array() - model.feat_mean(j)).square().sum() / n;
    const double sd = std::sqrt(var);
    model.feat_scale(j) = sd > 1e-12 ? sd : 1.0;
  }
  d.x = (raw.rowwise() - model.feat_mean.transpose()).array().rowwise() /
        model.feat_scale.transpose().array();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  double b = 0.0;
  double cur = loss(d, w, b, options.l2);
  double step = 1.0;
  for (int it = 0; it < options.max_steps; ++it) {
    Eigen::VectorXd gw;
    double gb;
    gradient(d, w, b, options.l2, gw, gb);
    // backtracking line search on the descent direction
    bool moved = false;
    while (step > 1e-16) {
      const Eigen::VectorXd w_new = w - step * gw;
      const double b_new = b - step * gb;
      const double next = loss(d, w_new, b_new, options.l2);
      if (next <= cur) {
        const double gain = cur - next;
        w = w_new;
        b = b_new;
        cur = next;
        moved = true;
        step *= 1.5;
        if (gain < options.loss_tol) it = options.max_steps;  // converged
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }

  model.weights = w;
  model.bias = b;
  return model;
}

Prediction predict(const ClassifierModel& model, const SatFeatureVector& x) {
  if (model.weights.size() != SatFeatureVector::kDim ||
      model.feat_mean.size() != model.weights.size() ||
      model.feat_scale.size() != model.weights.size())
    throw std::invalid_argument("predict: feature dimension mismatch");
  const Eigen::VectorXd z =
      (x.vector() - model.feat_mean).cwiseQuotient(model.feat_scale);
  Prediction out;
  out.probability = sigmoid(model.weights.dot(z) + model.bias);
  out.is_nlos = out.probability >= model.threshold;
  return out;
}

std::string ClassifierModel::serialize() const {
  std::ostringstream os;
  os << "ctfgo-classifier v1\n";
  os << "dim " << weights.size() << "\n";
  os << "threshold " << fmt_double(threshold) << "\n";
  os << "bias " << fmt_double(bias) << "\n";
  auto row = [&](const char* name, const Eigen::VectorXd& v) {
    os << name;
    for (int i = 0; i < v.size(); ++i) os << ' ' << fmt_double(v(i));
    os << "\n";
  };
  row("weights", weights);
  row("feat_mean", feat_mean);
  row("feat_scale", feat_scale);
  return os.str();
}

ClassifierModel ClassifierModel::deserialize(const std::string& text) {
  std::istringstream is(text);
  std::string line, word;
  if (!std::getline(is, line) || line.rfind("ctfgo-classifier", 0) != 0)
    throw std::runtime_error("classifier: bad header");
  int dim = 0;
  ClassifierModel m;
  is >> word >> dim;
  is >> word >> m.threshold;
  is >> word >> m.bias;
  m.weights.resize(dim);
  m.feat_mean.resize(dim);
  m.feat_scale.resize(dim);
  is >> word;
  for (int i = 0; i < dim; ++i) is >> m.weights(i);
  is >> word;
  for (int i = 0; i < dim; ++i) is >> m.feat_mean(i);
  is >> word;
  for (int i = 0; i < dim; ++i) is >> m.feat_scale(i);
  if (!is) throw std::runtime_error("classifier: truncated model file");
  return m;
}

std::string dataset_to_csv(const std::vector<LabeledSample>& dataset) {
  std::ostringstream os;
  os << "cn0,elevation,residual_prior,cn0_epoch_mean,cn0_epoch_std,cn0_delta,"
        "sat_count,is_nlos\n";
  for (const auto& s : dataset) {
    const auto v = s.features.vector();
    for (int i = 0; i < v.size(); ++i) os << fmt_double(v(i)) << ',';
    os << (s.is_nlos ? 1 : 0) << '\n';
  }
  return os.str();
}

std::vector<LabeledSample> dataset_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("dataset csv: empty");
  std::vector<LabeledSample> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw std::runtime_error("dataset csv: bad row");
    LabeledSample s;
    s.features.cn0 = std::stod(f[0]);
    s.features.elevation = std::stod(f[1]);
    s.features.residual_prior = std::stod(f[2]);
    s.features.cn0_epoch_mean = std::stod(f[3]);
    s.features.cn0_epoch_std = std::stod(f[4]);
    s.features.cn0_delta = std::stod(f[5]);
    s.features.sat_count = std::stod(f[6]);
    s.is_nlos = std::stoi(f[7]) != 0;
    out.push_back(s);
  }
  return out;
}

}  // namespace ctfgo
