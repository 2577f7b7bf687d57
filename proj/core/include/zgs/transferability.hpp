#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zgs/registry.hpp"

namespace zgs {

struct EvidenceOptions {
  double tolerance = 1e-8;     // stop when |delta log-evidence| falls below
  int max_iterations = 200;
  double alpha_when_mean_zero = 1e6;
  double precision_cap = 1e12;  // guards alpha/beta against overflow on exact fits
};

/// Converged hyperparameters of Bayesian linear regression y ~ N(Rm, 1/beta),
/// m ~ N(0, I/alpha).
struct EvidenceState {
  double alpha = 1.0;
  double beta = 1.0;
  Eigen::VectorXd m;
  double log_evidence = 0.0;
  int iterations = 0;
  std::size_t num_samples = 0;
  std::vector<double> trace;  // log-evidence after initialization and after each update
  std::vector<double> beta_trace;

  /// log_evidence / n
  double normalized() const { return log_evidence / static_cast<double>(num_samples); }
};

struct EvidenceValue {
  double log_evidence = 0.0;
  Eigen::VectorXd m;
};

/// Evidence maximization against a fixed design matrix R. The spectrum of
/// R^T R is computed once and reused for every label vector.
class EvidenceSolver {
 public:
  explicit EvidenceSolver(Eigen::MatrixXd features);

  Eigen::Index num_samples() const noexcept { return r_.rows(); }
  Eigen::Index dim() const noexcept { return r_.cols(); }

  /// log p(y | R, alpha, beta) and the posterior mean.
  EvidenceValue evaluate(const Eigen::VectorXd& y, double alpha, double beta) const;

  /// Fixed-point ascent from alpha = beta = 1.
  EvidenceState maximize(const Eigen::VectorXd& y, const EvidenceOptions& options = {}) const;

 private:
  struct Fit {
    Eigen::VectorXd m;
    double gamma = 0.0;
    double residual_sq = 0.0;
    double log_evidence = 0.0;
  };
  Fit fit(const Eigen::VectorXd& y, const Eigen::VectorXd& rty, double alpha, double beta) const;

  Eigen::MatrixXd r_;
  Eigen::VectorXd eigenvalues_;   // of R^T R, clamped at 0
  Eigen::MatrixXd eigenvectors_;
};

EvidenceValue log_evidence(const Eigen::MatrixXd& features, const Eigen::VectorXd& y, double alpha, double beta);
EvidenceState maximize_evidence(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                                const EvidenceOptions& options = {});

/// Mean over classes of the normalized maximized evidence of one-vs-rest labels.
double logme_score(const Eigen::MatrixXd& features, std::span<const int> labels, int num_classes,
                   const EvidenceOptions& options = {});

/// Features a model extracted on a dataset plus the sample labels.
struct ModelFeatureSet {
  std::string model_id;
  std::string dataset_id;
  std::vector<int> labels;
  Eigen::MatrixXd features;
};

TransferRecord logme_record(const ModelFeatureSet& set, int num_classes, const EvidenceOptions& options = {});

/// Reads `model_features/<model_id>/<dataset_id>.csv` (columns: label, f0..).
std::vector<ModelFeatureSet> load_model_features(const std::filesystem::path& root);
void write_model_features(const ModelFeatureSet& set, const std::filesystem::path& root);

/// Scores every feature set against its dataset's class count. Jobs are independent.
std::vector<TransferRecord> score_all(const Zoo& zoo, const std::vector<ModelFeatureSet>& sets, unsigned threads = 0);

/// Replaces records sharing (model, dataset, method) and appends new ones.
std::vector<TransferRecord> merge_transfer_scores(std::vector<TransferRecord> existing,
                                                  const std::vector<TransferRecord>& updates);

}  // namespace zgs
