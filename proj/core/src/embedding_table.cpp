#include "zgs/embedding_table.hpp"

#include <fstream>

#include "zgs/csv.hpp"
#include "zgs/error.hpp"

namespace zgs {

void EmbeddingTable::set(const NodeRef& node, Eigen::VectorXd v) {
  if (v.size() != dim_) raise(ErrorKind::ShapeError, "embedding for '" + node.id + "' has wrong dimension");
  if (!v.allFinite()) raise(ErrorKind::NumericalError, "embedding for '" + node.id + "' is not finite");
  vectors_[node] = std::move(v);
}

const Eigen::VectorXd* EmbeddingTable::find(const NodeRef& node) const {
  auto it = vectors_.find(node);
  return it == vectors_.end() ? nullptr : &it->second;
}

void EmbeddingTable::write_csv(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) raise(ErrorKind::MissingInput, "cannot write " + file.string());
  std::vector<std::string> cells{"kind", "id"};
  for (int i = 0; i < dim_; ++i) cells.push_back("v" + std::to_string(i));
  csv::write_row(out, cells);
  for (const auto& [node, v] : vectors_) {
    cells = {std::string(to_string(node.kind)), node.id};
    for (Eigen::Index i = 0; i < v.size(); ++i) cells.push_back(csv::format_real(v(i)));
    csv::write_row(out, cells);
  }
}

EmbeddingTable EmbeddingTable::read_csv(const std::filesystem::path& file) {
  auto t = csv::read(file);
  if (t.header.size() < 3) raise(ErrorKind::ParseError, file.string() + ": no embedding columns");
  EmbeddingTable table(static_cast<int>(t.header.size() - 2));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    auto kind = parse_node_kind(t.rows[r][0]);
    if (!kind) raise(ErrorKind::ParseError, "bad node kind at " + file.string() + ":" + std::to_string(t.line_numbers[r]));
    Eigen::VectorXd v(table.dim_);
    for (int i = 0; i < table.dim_; ++i) {
      v(i) = csv::parse_real(t.rows[r][static_cast<std::size_t>(i) + 2], file, t.line_numbers[r]);
    }
    table.set({*kind, t.rows[r][1]}, std::move(v));
  }
  return table;
}

}  // namespace zgs

#include "zgs/embed.hpp"

namespace zgs {

std::string_view to_string(EmbedderKind k) {
  switch (k) {
    case EmbedderKind::Node2Vec: return "node2vec";
    case EmbedderKind::Node2VecPlus: return "node2vec_plus";
    case EmbedderKind::GraphSage: return "graphsage";
    case EmbedderKind::Gat: return "gat";
  }
  return "unknown";
}

std::optional<EmbedderKind> parse_embedder(std::string_view s) {
  for (auto k : {EmbedderKind::Node2Vec, EmbedderKind::Node2VecPlus, EmbedderKind::GraphSage, EmbedderKind::Gat}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

EmbeddingTable learn_embeddings(const ZooGraph& graph, EmbedderKind kind, const WalkConfig& walk, const GnnConfig& gnn) {
  switch (kind) {
    case EmbedderKind::Node2Vec:
    case EmbedderKind::Node2VecPlus: {
      WalkConfig cfg = walk;
      cfg.variant = kind == EmbedderKind::Node2Vec ? WalkVariant::Node2Vec : WalkVariant::Node2VecPlus;
      return train_skipgram(sample_walks(graph, cfg), cfg);
    }
    case EmbedderKind::GraphSage:
    case EmbedderKind::Gat: {
      GnnConfig cfg = gnn;
      cfg.dim = walk.dim;
      return train_linkpred(graph, kind == EmbedderKind::GraphSage ? GnnKind::GraphSage : GnnKind::Gat, cfg);
    }
  }
  raise(ErrorKind::InvalidArgument, "unknown embedder");
}

}  // namespace zgs
