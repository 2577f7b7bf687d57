#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zgs/embedding_table.hpp"
#include "zgs/registry.hpp"
#include "zgs/simfeat.hpp"

namespace zgs {

/// Feature groups included in a regression row.
struct FeatureSpec {
  bool use_metadata = true;
  bool use_similarity = true;
  bool use_transfer_score = true;
  bool use_graph = true;

  bool any() const { return use_metadata || use_similarity || use_transfer_score || use_graph; }
};

struct ModelDatasetPair {
  std::string model_id;
  std::string dataset_id;

  auto operator<=>(const ModelDatasetPair&) const = default;
};

struct FeatureRow {
  std::string model_id;
  std::string dataset_id;
  Eigen::VectorXd x;
  std::optional<double> y;  // fine-tune accuracy when recorded
};

/// Builds regression rows for (model, dataset) pairs. Column order:
///   metadata   log10(num_samples), num_classes, input_shape, log10(num_params+1),
///              memory_mb, pretrained_accuracy, one-hot architecture, one-hot
///              pretrained dataset
///   similarity phi(pretrained dataset, dataset), 0 when unknown
///   transfer   normalized transfer score (0 when absent), presence flag
///   graph      f_G(model) || f_G(dataset)
/// One-hot vocabularies are frozen by `fit_vocabulary`; unseen categories
/// encode as an all-zero block.
class FeatureAssembler {
 public:
  FeatureAssembler(const Zoo& zoo, const SimilarityMatrix* phi, const EmbeddingTable* embeddings, FeatureSpec spec);

  void fit_vocabulary(const std::vector<ModelDatasetPair>& training_pairs);

  std::vector<FeatureRow> assemble(const std::vector<ModelDatasetPair>& pairs) const;
  FeatureRow assemble(const ModelDatasetPair& pair) const;

  std::vector<std::string> column_names() const;
  std::size_t width() const { return column_names().size(); }

 private:
  const Zoo& zoo_;
  const SimilarityMatrix* phi_;
  const EmbeddingTable* embeddings_;
  FeatureSpec spec_;
  std::vector<std::string> architectures_;
  std::vector<std::string> pretrained_datasets_;
  std::map<std::pair<std::string, std::string>, double> transfer_;
};

/// Fits the vocabulary on `pairs` and assembles them.
std::vector<FeatureRow> assemble_features(const Zoo& zoo, const SimilarityMatrix* phi, const EmbeddingTable* embeddings,
                                          const std::vector<ModelDatasetPair>& pairs, const FeatureSpec& spec);

/// Debug dump: model_id,dataset_id,<columns>,y
void write_features_csv(const std::vector<FeatureRow>& rows, const std::vector<std::string>& columns,
                        const std::filesystem::path& file);

}  // namespace zgs
