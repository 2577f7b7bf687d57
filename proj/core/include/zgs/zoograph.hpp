#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zgs/registry.hpp"
#include "zgs/simfeat.hpp"

namespace zgs {

enum class NodeKind { Model, Dataset };
std::string_view to_string(NodeKind k);
std::optional<NodeKind> parse_node_kind(std::string_view s);

struct NodeRef {
  NodeKind kind = NodeKind::Dataset;
  std::string id;

  auto operator<=>(const NodeRef&) const = default;
  bool operator==(const NodeRef&) const = default;
};

inline NodeRef model_node(std::string id) { return {NodeKind::Model, std::move(id)}; }
inline NodeRef dataset_node(std::string id) { return {NodeKind::Dataset, std::move(id)}; }

enum class EdgeKind { DatasetSimilarity, Performance, Transfer };
enum class EdgeLabel { Positive, Negative, Unlabeled };
std::string_view to_string(EdgeKind k);
std::string_view to_string(EdgeLabel l);

/// Model-dataset edges always run dataset -> model; similarity edges are
/// stored once per direction.
struct ZooEdge {
  NodeRef a;
  NodeRef b;
  EdgeKind kind = EdgeKind::DatasetSimilarity;
  double weight = 0.0;
  EdgeLabel label = EdgeLabel::Positive;

  bool operator==(const ZooEdge&) const = default;
};

struct GraphConfig {
  double transfer_prune_threshold = 0.5;
  double accuracy_prune_threshold = 0.5;
  double negative_accuracy_threshold = 0.5;
  bool dd_fully_connected = true;
};

class ZooGraph {
 public:
  ZooGraph() = default;
  ZooGraph(std::vector<NodeRef> nodes, std::vector<ZooEdge> edges,
           std::map<NodeRef, Eigen::VectorXd> node_features = {});

  const std::vector<NodeRef>& nodes() const noexcept { return nodes_; }
  const std::vector<ZooEdge>& edges() const noexcept { return edges_; }
  const std::map<NodeRef, Eigen::VectorXd>& node_features() const noexcept { return node_features_; }

  std::optional<std::size_t> index_of(const NodeRef& node) const;
  std::size_t count(EdgeKind kind) const;

 private:
  std::vector<NodeRef> nodes_;
  std::vector<ZooEdge> edges_;
  std::map<NodeRef, Eigen::VectorXd> node_features_;
  std::map<NodeRef, std::size_t> index_;
};

/// Per-dataset min-max scaling; a degenerate range maps every value to 1.
std::map<std::string, double> normalize_accuracy(const std::vector<TrainingRecord>& records);

/// Min-max scaling shared by accuracies and transfer scores.
std::vector<double> min_max_normalize(const std::vector<double>& values);

/// Transfer scores of one method family, min-max normalized within each
/// dataset. LogME scores win over ingested ones for the same pair.
std::map<std::pair<std::string, std::string>, double> normalized_transfer_scores(const Zoo& zoo);

ZooGraph build_graph(const Zoo& zoo, const SimilarityMatrix& phi, const GraphConfig& config = {},
                     const std::vector<DatasetEmbedding>& dataset_features = {});

/// Drops every model-dataset edge incident to `target`; similarity edges stay.
ZooGraph remove_target_edges(const ZooGraph& graph, const std::string& target);

void write_graph_csv(const ZooGraph& graph, const std::filesystem::path& file);

}  // namespace zgs
