#include "zgs/predictor.hpp"

#include <limits>
#include <cmath>
#include <fstream>
#include <map>

#include "zgs/csv.hpp"
#include "zgs/error.hpp"

namespace zgs {

std::string_view to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::Ridge: return "ridge";
    case PredictorKind::Forest: return "forest";
    case PredictorKind::Gbm: return "gbm";
  }
  return "unknown";
}

std::optional<PredictorKind> parse_predictor(std::string_view s) {
  for (auto k : {PredictorKind::Ridge, PredictorKind::Forest, PredictorKind::Gbm}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

RidgeModel RidgeModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (n < 2) raise(ErrorKind::InsufficientData, "ridge regression needs at least two rows");
  if (y.size() != n) raise(ErrorKind::ShapeError, "target length does not match rows");

  RidgeModel model;
  model.mean_ = X.colwise().mean().transpose();
  model.scale_ = Eigen::VectorXd::Zero(d);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double sd = std::sqrt((X.col(j).array() - model.mean_(j)).square().mean());
    if (sd > 1e-12 * std::max(1.0, std::abs(model.mean_(j)))) {
      model.scale_(j) = sd;
      kept.push_back(j);
    }
  }

  const double y_mean = y.mean();
  model.coef_ = Eigen::VectorXd::Zero(d);
  model.intercept_ = y_mean;
  if (kept.empty()) return model;

  const auto k = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd Z(n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto j = kept[static_cast<std::size_t>(c)];
    Z.col(c) = (X.col(j).array() - model.mean_(j)) / model.scale_(j);
  }
  Eigen::MatrixXd gram = Z.transpose() * Z;
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd w = gram.ldlt().solve(Z.transpose() * (y.array() - y_mean).matrix());
  if (!w.allFinite()) raise(ErrorKind::NumericalError, "ridge normal equations are singular");

  for (Eigen::Index c = 0; c < k; ++c) {
    const auto j = kept[static_cast<std::size_t>(c)];
    model.coef_(j) = w(c) / model.scale_(j);
    model.intercept_ -= model.coef_(j) * model.mean_(j);
  }
  return model;
}

double RidgeModel::predict(const Eigen::VectorXd& x) const { return intercept_ + coef_.dot(x); }

double PredictorModel::predict(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != num_features_) {
    raise(ErrorKind::ShapeError, "expected " + std::to_string(num_features_) + " features, got " + std::to_string(x.size()));
  }
  return std::visit([&](const auto& m) { return m.predict(x); }, model_);
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> design_matrix(const std::vector<FeatureRow>& rows) {
  if (rows.empty()) raise(ErrorKind::InsufficientData, "no training rows");
  const auto d = rows.front().x.size();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), d);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.x.size() != d) raise(ErrorKind::ShapeError, "feature rows have inconsistent length");
    if (!r.y) raise(ErrorKind::InsufficientData, "training row (" + r.model_id + "," + r.dataset_id + ") has no label");
    X.row(static_cast<Eigen::Index>(i)) = r.x.transpose();
    y(static_cast<Eigen::Index>(i)) = *r.y;
  }
  return {std::move(X), std::move(y)};
}

PredictorModel train_ridge(const std::vector<FeatureRow>& rows, double lambda) {
  if (rows.size() < 2) raise(ErrorKind::InsufficientData, "ridge regression needs at least two rows");
  auto [X, y] = design_matrix(rows);
  return {RidgeModel::fit(X, y, lambda), static_cast<std::size_t>(X.cols())};
}

PredictorModel train_forest(const std::vector<FeatureRow>& rows, const ForestConfig& config) {
  if (rows.size() < 2) raise(ErrorKind::InsufficientData, "random forest needs at least two rows");
  auto [X, y] = design_matrix(rows);
  return {ForestModel::fit(X, y, config), static_cast<std::size_t>(X.cols())};
}

PredictorModel train_gbm(const std::vector<FeatureRow>& rows, const GbmConfig& config) {
  if (rows.size() < 2) raise(ErrorKind::InsufficientData, "gradient boosting needs at least two rows");
  auto [X, y] = design_matrix(rows);
  return {GbmModel::fit(X, y, config), static_cast<std::size_t>(X.cols())};
}

ScoreMatrix predict(const PredictorModel& model, const std::vector<FeatureRow>& rows) {
  ScoreMatrix out;
  std::map<std::string, std::size_t> mi, di;
  for (const auto& r : rows) {
    if (mi.emplace(r.model_id, out.model_ids.size()).second) out.model_ids.push_back(r.model_id);
    if (di.emplace(r.dataset_id, out.dataset_ids.size()).second) out.dataset_ids.push_back(r.dataset_id);
  }
  const auto nm = static_cast<Eigen::Index>(out.model_ids.size());
  const auto nd = static_cast<Eigen::Index>(out.dataset_ids.size());
  out.S = Eigen::MatrixXd::Constant(nm, nd, std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : rows) {
    out.S(static_cast<Eigen::Index>(mi[r.model_id]), static_cast<Eigen::Index>(di[r.dataset_id])) = model.predict(r.x);
  }
  if (!out.S.allFinite()) raise(ErrorKind::ShapeError, "prediction rows do not cover the full model x dataset grid");
  return out;
}

void write_scores_csv(const ScoreMatrix& scores, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) raise(ErrorKind::MissingInput, "cannot write " + file.string());
  csv::write_row(out, {"model_id", "dataset_id", "score"});
  for (std::size_t j = 0; j < scores.dataset_ids.size(); ++j) {
    for (std::size_t i = 0; i < scores.model_ids.size(); ++i) {
      csv::write_row(out, {scores.model_ids[i], scores.dataset_ids[j],
                           csv::format_real(scores.S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))});
    }
  }
}

}  // namespace zgs
