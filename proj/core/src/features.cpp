#include "zgs/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "zgs/csv.hpp"
#include "zgs/error.hpp"
#include "zgs/zoograph.hpp"

namespace zgs {

FeatureAssembler::FeatureAssembler(const Zoo& zoo, const SimilarityMatrix* phi, const EmbeddingTable* embeddings,
                                   FeatureSpec spec)
    : zoo_(zoo), phi_(phi), embeddings_(embeddings), spec_(spec) {
  if (!spec_.any()) raise(ErrorKind::InvalidArgument, "feature spec selects no feature group");
  if (spec_.use_graph && !embeddings_) raise(ErrorKind::MissingEmbedding, "graph features requested without embeddings");
  if (spec_.use_transfer_score) transfer_ = normalized_transfer_scores(zoo_);
}

void FeatureAssembler::fit_vocabulary(const std::vector<ModelDatasetPair>& training_pairs) {
  std::set<std::string> arch, pre;
  for (const auto& p : training_pairs) {
    const auto* m = zoo_.find_model(p.model_id);
    if (!m) raise(ErrorKind::NotFound, "unknown model '" + p.model_id + "'");
    arch.insert(m->architecture);
    if (m->pretrained_dataset_id) pre.insert(*m->pretrained_dataset_id);
  }
  architectures_.assign(arch.begin(), arch.end());
  pretrained_datasets_.assign(pre.begin(), pre.end());
}

std::vector<std::string> FeatureAssembler::column_names() const {
  std::vector<std::string> names;
  if (spec_.use_metadata) {
    names = {"log10_num_samples", "num_classes", "input_shape", "log10_num_params", "memory_mb", "pretrained_accuracy"};
    for (const auto& a : architectures_) names.push_back("arch=" + a);
    for (const auto& d : pretrained_datasets_) names.push_back("pretrained=" + d);
  }
  if (spec_.use_similarity) names.push_back("source_similarity");
  if (spec_.use_transfer_score) {
    names.push_back("transfer_score");
    names.push_back("transfer_present");
  }
  if (spec_.use_graph) {
    for (int i = 0; i < embeddings_->dim(); ++i) names.push_back("g_model_" + std::to_string(i));
    for (int i = 0; i < embeddings_->dim(); ++i) names.push_back("g_dataset_" + std::to_string(i));
  }
  return names;
}

FeatureRow FeatureAssembler::assemble(const ModelDatasetPair& pair) const {
  const auto* m = zoo_.find_model(pair.model_id);
  const auto* d = zoo_.find_dataset(pair.dataset_id);
  if (!m) raise(ErrorKind::NotFound, "unknown model '" + pair.model_id + "'");
  if (!d) raise(ErrorKind::NotFound, "unknown dataset '" + pair.dataset_id + "'");

  std::vector<double> x;
  if (spec_.use_metadata) {
    x.push_back(std::log10(static_cast<double>(d->num_samples)));
    x.push_back(static_cast<double>(d->num_classes));
    x.push_back(static_cast<double>(m->input_shape));
    x.push_back(std::log10(static_cast<double>(m->num_params) + 1.0));
    x.push_back(m->memory_mb);
    x.push_back(m->pretrained_accuracy.value_or(0.0));
    for (const auto& a : architectures_) x.push_back(m->architecture == a ? 1.0 : 0.0);
    for (const auto& p : pretrained_datasets_) x.push_back(m->pretrained_dataset_id == p ? 1.0 : 0.0);
  }
  if (spec_.use_similarity) {
    std::optional<double> s;
    if (phi_ && m->pretrained_dataset_id) s = phi_->at(*m->pretrained_dataset_id, d->dataset_id);
    x.push_back(s.value_or(0.0));
  }
  if (spec_.use_transfer_score) {
    auto it = transfer_.find({m->model_id, d->dataset_id});
    x.push_back(it != transfer_.end() ? it->second : 0.0);
    x.push_back(it != transfer_.end() ? 1.0 : 0.0);
  }
  if (spec_.use_graph) {
    const auto* fm = embeddings_->find(model_node(m->model_id));
    const auto* fd = embeddings_->find(dataset_node(d->dataset_id));
    if (!fm || !fd) {
      raise(ErrorKind::MissingEmbedding, "no embedding for pair (" + m->model_id + "," + d->dataset_id + ")");
    }
    x.insert(x.end(), fm->data(), fm->data() + fm->size());
    x.insert(x.end(), fd->data(), fd->data() + fd->size());
  }

  FeatureRow row{m->model_id, d->dataset_id, Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())),
                 zoo_.finetune_accuracy(m->model_id, d->dataset_id)};
  if (!row.x.allFinite()) raise(ErrorKind::NumericalError, "non-finite feature for (" + m->model_id + "," + d->dataset_id + ")");
  return row;
}

std::vector<FeatureRow> FeatureAssembler::assemble(const std::vector<ModelDatasetPair>& pairs) const {
  std::vector<FeatureRow> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) rows.push_back(assemble(p));
  return rows;
}

std::vector<FeatureRow> assemble_features(const Zoo& zoo, const SimilarityMatrix* phi, const EmbeddingTable* embeddings,
                                          const std::vector<ModelDatasetPair>& pairs, const FeatureSpec& spec) {
  FeatureAssembler assembler(zoo, phi, embeddings, spec);
  assembler.fit_vocabulary(pairs);
  return assembler.assemble(pairs);
}

void write_features_csv(const std::vector<FeatureRow>& rows, const std::vector<std::string>& columns,
                        const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) raise(ErrorKind::MissingInput, "cannot write " + file.string());
  std::vector<std::string> cells{"model_id", "dataset_id"};
  cells.insert(cells.end(), columns.begin(), columns.end());
  cells.push_back("y");
  csv::write_row(out, cells);
  for (const auto& r : rows) {
    cells = {r.model_id, r.dataset_id};
    for (Eigen::Index i = 0; i < r.x.size(); ++i) cells.push_back(csv::format_real(r.x(i)));
    cells.push_back(r.y ? csv::format_real(*r.y) : std::string());
    csv::write_row(out, cells);
  }
}

}  // namespace zgs
