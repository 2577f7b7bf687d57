#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "zgs/features.hpp"

namespace zgs {

enum class PredictorKind { Ridge, Forest, Gbm };
std::string_view to_string(PredictorKind k);
std::optional<PredictorKind> parse_predictor(std::string_view s);

/// Linear regression on standardized features. Constant columns are dropped.
class RidgeModel {
 public:
  static RidgeModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda = 1e-6);

  double predict(const Eigen::VectorXd& x) const;
  /// Coefficients on the original feature scale (0 for dropped columns).
  const Eigen::VectorXd& coefficients() const noexcept { return coef_; }
  double intercept() const noexcept { return intercept_; }
  const Eigen::VectorXd& feature_mean() const noexcept { return mean_; }
  const Eigen::VectorXd& feature_scale() const noexcept { return scale_; }

 private:
  Eigen::VectorXd mean_, scale_, coef_;
  double intercept_ = 0.0;
};

/// Axis-aligned regression tree; a sample goes left when x[feature] <= threshold.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  struct Params {
    int max_depth = 5;
    int max_features = 0;  // 0 = all columns
  };

  /// `counts[i]` is the multiplicity of row i (bootstrap weights; 0 excludes it).
  static RegressionTree fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<int>& counts,
                            const Params& params, std::mt19937_64* rng = nullptr);

  double predict(const Eigen::VectorXd& x) const;
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  int depth() const;

 private:
  friend class TreeBuilder;
  std::vector<Node> nodes_;
};

struct ForestConfig {
  int trees = 100;
  int max_depth = 5;
  std::uint64_t seed = 42;
};

struct GbmConfig {
  int trees = 500;
  int max_depth = 5;
  double shrinkage = 0.05;
  std::uint64_t seed = 42;
};

/// Bootstrap-aggregated trees with sqrt(d) candidate features per split.
class ForestModel {
 public:
  static ForestModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestConfig& config);
  double predict(const Eigen::VectorXd& x) const;
  std::size_t size() const noexcept { return trees_.size(); }

 private:
  std::vector<RegressionTree> trees_;
};

/// Squared-loss gradient boosting.
class GbmModel {
 public:
  static GbmModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GbmConfig& config);
  double predict(const Eigen::VectorXd& x) const;
  /// Training MSE after initialization and after each round.
  const std::vector<double>& training_mse() const noexcept { return mse_; }

 private:
  double base_ = 0.0;
  double shrinkage_ = 0.05;
  std::vector<RegressionTree> trees_;
  std::vector<double> mse_;
};

class PredictorModel {
 public:
  using Variant = std::variant<RidgeModel, ForestModel, GbmModel>;

  PredictorModel(Variant model, std::size_t num_features) : model_(std::move(model)), num_features_(num_features) {}

  std::size_t num_features() const noexcept { return num_features_; }
  const Variant& model() const noexcept { return model_; }
  double predict(const Eigen::VectorXd& x) const;

 private:
  Variant model_;
  std::size_t num_features_;
};

/// Predicted scores; S(i, j) pairs model_ids[i] with dataset_ids[j].
struct ScoreMatrix {
  std::vector<std::string> model_ids;
  std::vector<std::string> dataset_ids;
  Eigen::MatrixXd S;
};

/// Stacks labelled rows into X, y. Throws InsufficientData on unlabelled rows.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> design_matrix(const std::vector<FeatureRow>& rows);

PredictorModel train_ridge(const std::vector<FeatureRow>& rows, double lambda = 1e-6);
PredictorModel train_forest(const std::vector<FeatureRow>& rows, const ForestConfig& config = {});
PredictorModel train_gbm(const std::vector<FeatureRow>& rows, const GbmConfig& config = {});

/// Scores every row. Rows must cover the full model x dataset grid they mention.
ScoreMatrix predict(const PredictorModel& model, const std::vector<FeatureRow>& rows);

void write_scores_csv(const ScoreMatrix& scores, const std::filesystem::path& file);

}  // namespace zgs
