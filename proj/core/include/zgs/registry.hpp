#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace zgs {

enum class Modality { Image, Text };
enum class RecordKind { Pretrain, Finetune };
enum class TransferMethod { LogME, Ingested };

std::string_view to_string(Modality m);
std::string_view to_string(RecordKind k);
std::string_view to_string(TransferMethod m);
std::optional<Modality> parse_modality(std::string_view s);
std::optional<RecordKind> parse_record_kind(std::string_view s);
std::optional<TransferMethod> parse_transfer_method(std::string_view s);

struct ModelCard {
  std::string model_id;
  std::string architecture;
  std::optional<std::string> pretrained_dataset_id;
  std::int64_t input_shape = 0;  // pixels per side, or max tokens for text
  std::int64_t num_params = 0;
  double memory_mb = 0.0;
  std::optional<double> pretrained_accuracy;

  bool operator==(const ModelCard&) const = default;
};

struct DatasetCard {
  std::string dataset_id;
  std::int64_t num_samples = 0;
  std::int64_t num_classes = 0;
  Modality modality = Modality::Image;

  bool operator==(const DatasetCard&) const = default;
};

/// Observed accuracy of a model trained or fine-tuned on a dataset.
struct TrainingRecord {
  std::string model_id;
  std::string dataset_id;
  double accuracy = 0.0;
  RecordKind kind = RecordKind::Finetune;

  bool operator==(const TrainingRecord&) const = default;
};

/// Per-sample features of a dataset as produced by a probe network, one row per sample.
struct SampleFeatureMatrix {
  std::string dataset_id;
  Eigen::MatrixXd rows;

  bool operator==(const SampleFeatureMatrix& o) const {
    return dataset_id == o.dataset_id && rows.rows() == o.rows.rows() && rows.cols() == o.rows.cols() &&
           rows == o.rows;
  }
};

struct TransferRecord {
  std::string model_id;
  std::string dataset_id;
  TransferMethod method = TransferMethod::Ingested;
  double score = 0.0;

  bool operator==(const TransferRecord&) const = default;
};

/// Raw zoo contents. Construct a `Zoo` from it to get indexed, read-only access.
struct ZooData {
  std::vector<ModelCard> models;
  std::vector<DatasetCard> datasets;
  std::vector<TrainingRecord> history;
  std::map<std::string, SampleFeatureMatrix> features;
  std::vector<TransferRecord> transfer_scores;

  bool operator==(const ZooData&) const = default;
};

/// Immutable, indexed view over zoo contents. Construction does not validate;
/// `load_zoo` does.
class Zoo {
 public:
  Zoo() = default;
  explicit Zoo(ZooData data);

  const ZooData& data() const noexcept { return data_; }
  const std::vector<ModelCard>& models() const noexcept { return data_.models; }
  const std::vector<DatasetCard>& datasets() const noexcept { return data_.datasets; }
  const std::vector<TrainingRecord>& history() const noexcept { return data_.history; }
  const std::map<std::string, SampleFeatureMatrix>& features() const noexcept { return data_.features; }
  const std::vector<TransferRecord>& transfer_scores() const noexcept { return data_.transfer_scores; }

  std::optional<std::size_t> model_index(std::string_view id) const;
  std::optional<std::size_t> dataset_index(std::string_view id) const;
  const ModelCard* find_model(std::string_view id) const;
  const DatasetCard* find_dataset(std::string_view id) const;

  /// Fine-tune accuracy of (model, dataset) if recorded.
  std::optional<double> finetune_accuracy(std::string_view model_id, std::string_view dataset_id) const;

 private:
  ZooData data_;
  std::unordered_map<std::string, std::size_t> model_index_;
  std::unordered_map<std::string, std::size_t> dataset_index_;
  std::map<std::pair<std::string, std::string>, double> finetune_;
};

struct ValidationReport {
  std::vector<std::string> violations;

  bool clean() const noexcept { return violations.empty(); }
};

/// Lists every invariant violation; an empty report means the zoo is clean.
ValidationReport validate_zoo(const Zoo& zoo);

/// Loads `models.csv`, `datasets.csv`, `history.csv` and the optional
/// `features/<dataset_id>.csv` and `transfer_scores.csv` under `root`.
Zoo load_zoo(const std::filesystem::path& root);

/// Writes the registry directory layout read by `load_zoo`.
void save_zoo(const Zoo& zoo, const std::filesystem::path& root);

std::vector<TransferRecord> read_transfer_scores(const std::filesystem::path& file,
                                                 const std::filesystem::path& root_for_messages = {});
void write_transfer_scores(const std::vector<TransferRecord>& records, const std::filesystem::path& file);

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& file);
void write_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& file);

}  // namespace zgs
