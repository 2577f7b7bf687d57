#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zgs/registry.hpp"

namespace zgs {

/// Synthetic zoo with latent structure:
///   T(i, j) = logistic(u_i . v_j + b_i + c_j + eps),  eps ~ N(0, noise_std^2).
/// A model's latent leans toward the latent of its pretraining dataset.
struct SynthConfig {
  int n_models = 40;
  int n_datasets = 12;
  int latent_dim = 4;
  double noise_std = 0.05;
  int feature_dim = 16;
  std::uint64_t seed = 42;
  double observed_fraction = 0.7;  // share of (model, dataset) pairs with a fine-tune record
  int samples_per_dataset = 8;
  double feature_noise_std = 0.05;
  bool transfer_scores = true;  // ingest a noisy logit per pair as a transfer score
  double transfer_noise_std = 1.0;
};

void validate(const SynthConfig& config);

struct SynthTruth {
  std::vector<std::string> model_ids;
  std::vector<std::string> dataset_ids;
  Eigen::MatrixXd U;            // n_models x latent_dim
  Eigen::MatrixXd V;            // n_datasets x latent_dim
  Eigen::VectorXd model_bias;   // b
  Eigen::VectorXd dataset_bias; // c
  Eigen::MatrixXd logit;        // u.v + b + c, without eps
  Eigen::MatrixXd accuracy;     // T for every pair, observed or not
};

struct SynthZoo {
  Zoo zoo;
  SynthTruth truth;
};

/// Deterministic given the config. Throws DegenerateLabels when a dataset's
/// observed accuracies have standard deviation <= 0.01.
SynthZoo generate(const SynthConfig& config);

/// Registry layout plus `truth.csv` (model_id,dataset_id,true_logit).
void write_synth_zoo(const SynthZoo& synth, const std::filesystem::path& root);

}  // namespace zgs
