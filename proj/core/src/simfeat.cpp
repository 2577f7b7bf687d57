#include "zgs/simfeat.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include "zgs/csv.hpp"
#include "zgs/error.hpp"

namespace fs = std::filesystem;

namespace zgs {

SimilarityMatrix::SimilarityMatrix(std::vector<std::string> dataset_ids, Eigen::MatrixXd phi)
    : ids_(std::move(dataset_ids)), phi_(std::move(phi)) {
  if (phi_.rows() != static_cast<Eigen::Index>(ids_.size()) || phi_.cols() != phi_.rows()) {
    raise(ErrorKind::ShapeError, "similarity matrix shape does not match dataset list");
  }
}

std::optional<std::size_t> SimilarityMatrix::index(const std::string& dataset_id) const {
  auto it = std::find(ids_.begin(), ids_.end(), dataset_id);
  if (it == ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

std::optional<double> SimilarityMatrix::at(const std::string& a, const std::string& b) const {
  auto i = index(a), j = index(b);
  if (!i || !j) return std::nullopt;
  return phi_(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(*j));
}

DatasetEmbedding aggregate_features(const SampleFeatureMatrix& features, Aggregation mode) {
  if (features.rows.rows() == 0 || features.rows.cols() == 0) {
    raise(ErrorKind::EmptyInput, "no samples for dataset '" + features.dataset_id + "'");
  }
  Eigen::VectorXd v = features.rows.colwise().sum().transpose();
  if (mode == Aggregation::Mean) v /= static_cast<double>(features.rows.rows());
  return {features.dataset_id, std::move(v), EmbeddingSource::Aggregated};
}

double correlation_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) raise(ErrorKind::ShapeError, "vectors differ in dimension");
  if (u.size() < 2) raise(ErrorKind::ShapeError, "correlation distance needs dimension >= 2");
  const Eigen::Map<const Eigen::VectorXd> a(u.data(), static_cast<Eigen::Index>(u.size()));
  const Eigen::Map<const Eigen::VectorXd> b(v.data(), static_cast<Eigen::Index>(v.size()));
  const Eigen::VectorXd ac = a.array() - a.mean();
  const Eigen::VectorXd bc = b.array() - b.mean();
  const double na = ac.norm(), nb = bc.norm();
  if (na == 0.0 || nb == 0.0) raise(ErrorKind::DegenerateVector, "constant vector has zero centered norm");
  const double cosine = std::clamp(ac.dot(bc) / (na * nb), -1.0, 1.0);
  return 1.0 - cosine;
}

SimilarityMatrix similarity_matrix(const std::vector<DatasetEmbedding>& embeddings) {
  const auto k = embeddings.size();
  if (k < 2) raise(ErrorKind::InsufficientData, "similarity needs at least two dataset embeddings");
  const auto dim = embeddings.front().vector.size();
  for (const auto& e : embeddings) {
    if (e.vector.size() != dim) raise(ErrorKind::ShapeError, "embedding '" + e.dataset_id + "' has inconsistent dimension");
  }
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      double d = 0.0;
      try {
        d = correlation_distance({embeddings[i].vector.data(), static_cast<std::size_t>(dim)},
                                 {embeddings[j].vector.data(), static_cast<std::size_t>(dim)});
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateVector) throw;
        const auto& vi = embeddings[i].vector;
        const auto& bad = (vi.array() - vi.mean()).matrix().norm() == 0.0 ? embeddings[i] : embeddings[j];
        raise(ErrorKind::DegenerateVector, "embedding of dataset '" + bad.dataset_id + "' is constant");
      }
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      phi(ii, jj) = phi(jj, ii) = 1.0 - d;
    }
  }
  std::vector<std::string> ids;
  for (const auto& e : embeddings) ids.push_back(e.dataset_id);
  return {std::move(ids), std::move(phi)};
}

std::vector<DatasetEmbedding> zoo_dataset_embeddings(const Zoo& zoo, Aggregation mode) {
  std::vector<DatasetEmbedding> out;
  for (const auto& d : zoo.datasets()) {
    auto it = zoo.features().find(d.dataset_id);
    if (it != zoo.features().end()) out.push_back(aggregate_features(it->second, mode));
  }
  return out;
}

void write_dataset_embedding(const DatasetEmbedding& e, const fs::path& file) {
  Eigen::MatrixXd row = e.vector.transpose();
  write_matrix_csv(row, file);
}

DatasetEmbedding read_dataset_embedding(const fs::path& file) {
  auto m = read_matrix_csv(file);
  if (m.rows() != 1) raise(ErrorKind::ParseError, file.string() + ": expected exactly one embedding row");
  return {file.stem().string(), m.row(0).transpose(), EmbeddingSource::Ingested};
}

void write_similarity_csv(const SimilarityMatrix& s, const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) raise(ErrorKind::MissingInput, "cannot write " + file.string());
  csv::write_row(out, {"dataset_a", "dataset_b", "phi"});
  const auto& ids = s.dataset_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = 0; j < ids.size(); ++j) {
      csv::write_row(out, {ids[i], ids[j],
                           csv::format_real(s.phi()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))});
    }
  }
}

SimilarityMatrix read_similarity_csv(const fs::path& file) {
  auto t = csv::read(file);
  const auto ca = t.column("dataset_a"), cb = t.column("dataset_b"), cp = t.column("phi");
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> index;
  auto id_of = [&](const std::string& id) {
    auto [it, inserted] = index.emplace(id, ids.size());
    if (inserted) ids.push_back(id);
    return it->second;
  };
  std::vector<std::tuple<std::size_t, std::size_t, double>> cells;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto i = id_of(t.rows[r][ca]);
    const auto j = id_of(t.rows[r][cb]);
    cells.emplace_back(i, j, csv::parse_real(t.rows[r][cp], file, t.line_numbers[r]));
  }
  const auto k = static_cast<Eigen::Index>(ids.size());
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(k, k);
  for (auto [i, j, v] : cells) {
    phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    phi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
  }
  return {std::move(ids), std::move(phi)};
}

}  // namespace zgs
