#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zgs/embed.hpp"
#include "zgs/features.hpp"
#include "zgs/predictor.hpp"
#include "zgs/registry.hpp"
#include "zgs/zoograph.hpp"

namespace zgs {

/// One strategy: graph learner, predictor, feature groups and their settings.
/// `seed` overrides the seeds of the walk, GNN, forest and boosting configs.
struct PipelineConfig {
  std::string id = "default";
  EmbedderKind embedder = EmbedderKind::Node2Vec;
  PredictorKind predictor = PredictorKind::Ridge;
  FeatureSpec features;
  GraphConfig graph;
  WalkConfig walk;
  GnnConfig gnn;
  ForestConfig forest;
  GbmConfig gbm;
  double ridge_lambda = 1e-6;
  Aggregation aggregation = Aggregation::Sum;
  std::uint64_t seed = 42;
  std::vector<int> topk = {1, 5};
  double min_target_std = 0.005;  // compare_strategies skips flatter targets
  unsigned threads = 0;
};

void validate(const PipelineConfig& config);

struct LooResult {
  std::string target_dataset_id;
  double tau = 0.0;
  std::map<int, double> topk_accuracy;
  std::size_t n_models = 0;  // models with ground truth on the target
  std::vector<std::string> model_ids;
  Eigen::VectorXd scores;  // predicted, aligned with model_ids
  Eigen::VectorXd truth;   // fine-tune accuracy, aligned with model_ids
  std::size_t training_rows = 0;

  bool operator==(const LooResult& o) const;
};

/// Observation points inside one fold.
struct LooHooks {
  std::function<void(const std::vector<FeatureRow>&)> on_training_rows;
  std::function<void(const EmbeddingTable&)> on_embeddings;
};

/// Pearson correlation of s and t. Throws DegenerateVector when either is constant.
double pearson(std::span<const double> s, std::span<const double> t);
double pearson(const Eigen::VectorXd& s, const Eigen::VectorXd& t);

/// Mean of t over the k entries with the largest s; ties go to the smaller id.
double topk_accuracy(std::span<const double> s, std::span<const double> t, int k,
                     std::span<const std::string> ids = {});

/// Dataset similarity used by the pipeline (aggregated sample features).
SimilarityMatrix pipeline_similarity(const Zoo& zoo, Aggregation aggregation);

/// A trained pipeline: similarity, embeddings, training rows and predictor.
struct PipelineFit {
  PipelineConfig config;
  SimilarityMatrix phi;
  EmbeddingTable embeddings;
  std::vector<ModelDatasetPair> training_pairs;
  std::vector<FeatureRow> training_rows;
  std::vector<std::string> columns;
  std::optional<PredictorModel> model;

  /// Scores every zoo model on each of `datasets`.
  ScoreMatrix score(const Zoo& zoo, const std::vector<std::string>& datasets) const;
};

/// Trains on every fine-tune record outside `held_out` (empty = keep all). The
/// graph loses all model-dataset edges of `held_out` before embedding.
PipelineFit fit_pipeline(const Zoo& zoo, const PipelineConfig& config, const std::string& held_out = {},
                         const LooHooks& hooks = {});

/// Trains the pipeline without any edge or label of `target` and scores every
/// model on it (a single-column ScoreMatrix in zoo model order).
ScoreMatrix score_target(const Zoo& zoo, const PipelineConfig& config, const std::string& target,
                         const LooHooks& hooks = {});

/// Holds out every model-dataset edge and label of `target`, trains on the rest
/// and scores all models on `target`.
LooResult loo_evaluate(const Zoo& zoo, const PipelineConfig& config, const std::string& target,
                       const LooHooks& hooks = {});

struct RatioOutcome {
  double ratio = 0.0;
  std::size_t training_records = 0;
  std::optional<LooResult> result;
  std::string note;  // why the ratio was skipped
};

/// Re-runs `target`'s fold on seeded subsamples of the non-target history.
std::map<double, RatioOutcome> ratio_ablation(const Zoo& zoo, const PipelineConfig& config, const std::string& target,
                                              const std::vector<double>& ratios);

/// History subsample used by `ratio_ablation`: floor(ratio * |non-target records|)
/// non-target records in their original order, plus every target record.
std::vector<TrainingRecord> subsample_history(const Zoo& zoo, const std::string& target, double ratio,
                                              std::uint64_t seed);

struct StrategyRow {
  std::string config_id;
  double mean_tau = 0.0;
  std::size_t n_targets = 0;
  std::vector<LooResult> results;
};

struct StrategyReport {
  std::vector<StrategyRow> rows;  // one per config, in input order
  std::vector<std::string> notes;  // skipped targets and per-target failures
};

/// Targets that qualify for evaluation: at least two fine-tune records and an
/// accuracy standard deviation of at least `min_std`. Others get a note.
std::vector<std::string> evaluation_targets(const Zoo& zoo, double min_std, std::vector<std::string>* notes = nullptr);

StrategyReport compare_strategies(const Zoo& zoo, const std::vector<PipelineConfig>& configs);

}  // namespace zgs
