#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zgs/registry.hpp"

namespace zgs {

enum class EmbeddingSource { Aggregated, Ingested };
enum class Aggregation { Sum, Mean };

struct DatasetEmbedding {
  std::string dataset_id;
  Eigen::VectorXd vector;
  EmbeddingSource source = EmbeddingSource::Aggregated;
};

/// Pairwise dataset similarity; `phi(i, j)` pairs `dataset_ids[i]` and `dataset_ids[j]`.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::vector<std::string> dataset_ids, Eigen::MatrixXd phi);

  const std::vector<std::string>& dataset_ids() const noexcept { return ids_; }
  const Eigen::MatrixXd& phi() const noexcept { return phi_; }
  std::optional<std::size_t> index(const std::string& dataset_id) const;
  bool contains(const std::string& dataset_id) const { return index(dataset_id).has_value(); }
  /// Similarity of two datasets; nullopt when either is not covered.
  std::optional<double> at(const std::string& a, const std::string& b) const;

 private:
  std::vector<std::string> ids_;
  Eigen::MatrixXd phi_;
};

/// Column-wise sum of the per-sample rows (mean when `Aggregation::Mean`).
DatasetEmbedding aggregate_features(const SampleFeatureMatrix& features, Aggregation mode = Aggregation::Sum);

/// 1 - centered cosine of u and v, in [0, 2]. Throws DegenerateVector when
/// either vector is constant.
double correlation_distance(std::span<const double> u, std::span<const double> v);

/// phi[i][j] = 1 - correlation_distance; diagonal exactly 1.
SimilarityMatrix similarity_matrix(const std::vector<DatasetEmbedding>& embeddings);

/// Aggregates every feature matrix present in the zoo, in dataset order.
std::vector<DatasetEmbedding> zoo_dataset_embeddings(const Zoo& zoo, Aggregation mode = Aggregation::Sum);

void write_dataset_embedding(const DatasetEmbedding& e, const std::filesystem::path& file);
DatasetEmbedding read_dataset_embedding(const std::filesystem::path& file);
void write_similarity_csv(const SimilarityMatrix& s, const std::filesystem::path& file);
SimilarityMatrix read_similarity_csv(const std::filesystem::path& file);

}  // namespace zgs
