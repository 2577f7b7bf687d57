#include "zgs/zoograph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>

#include "zgs/csv.hpp"
#include "zgs/error.hpp"

namespace zgs {

std::string_view to_string(NodeKind k) { return k == NodeKind::Model ? "model" : "dataset"; }

std::optional<NodeKind> parse_node_kind(std::string_view s) {
  if (s == "model") return NodeKind::Model;
  if (s == "dataset") return NodeKind::Dataset;
  return std::nullopt;
}

std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::DatasetSimilarity: return "dd_similarity";
    case EdgeKind::Performance: return "md_performance";
    case EdgeKind::Transfer: return "md_transfer";
  }
  return "unknown";
}

std::string_view to_string(EdgeLabel l) {
  switch (l) {
    case EdgeLabel::Positive: return "positive";
    case EdgeLabel::Negative: return "negative";
    case EdgeLabel::Unlabeled: return "unlabeled";
  }
  return "unknown";
}

ZooGraph::ZooGraph(std::vector<NodeRef> nodes, std::vector<ZooEdge> edges,
                   std::map<NodeRef, Eigen::VectorXd> node_features)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), node_features_(std::move(node_features)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i], i).second) raise(ErrorKind::IntegrityError, "duplicate node '" + nodes_[i].id + "'");
  }
  std::set<std::tuple<NodeRef, NodeRef, EdgeKind>> seen;
  for (const auto& e : edges_) {
    if (!index_.count(e.a) || !index_.count(e.b)) {
      raise(ErrorKind::IntegrityError, "edge endpoint not in graph: " + e.a.id + " -> " + e.b.id);
    }
    if (e.a == e.b) raise(ErrorKind::IntegrityError, "self-loop on '" + e.a.id + "'");
    if (!seen.emplace(e.a, e.b, e.kind).second) {
      raise(ErrorKind::IntegrityError, "duplicate edge " + e.a.id + " -> " + e.b.id);
    }
    const bool dd = e.kind == EdgeKind::DatasetSimilarity;
    const bool ends_dd = e.a.kind == NodeKind::Dataset && e.b.kind == NodeKind::Dataset;
    const bool ends_md = e.a.kind != e.b.kind;
    if ((dd && !ends_dd) || (!dd && !ends_md)) {
      raise(ErrorKind::IntegrityError, "edge kind does not match endpoints: " + e.a.id + " -> " + e.b.id);
    }
  }
}

std::optional<std::size_t> ZooGraph::index_of(const NodeRef& node) const {
  auto it = index_.find(node);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ZooGraph::count(EdgeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [&](const ZooEdge& e) { return e.kind == kind; }));
}

std::vector<double> min_max_normalize(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  std::vector<double> out(values.size(), 1.0);
  if (*hi > *lo) {
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / (*hi - *lo);
  }
  return out;
}

std::map<std::string, double> normalize_accuracy(const std::vector<TrainingRecord>& records) {
  std::map<std::string, double> out;
  std::vector<double> acc;
  for (const auto& r : records) acc.push_back(r.accuracy);
  const auto norm = min_max_normalize(acc);
  for (std::size_t i = 0; i < records.size(); ++i) out[records[i].model_id] = norm[i];
  return out;
}

std::map<std::pair<std::string, std::string>, double> normalized_transfer_scores(const Zoo& zoo) {
  // One score per (model, dataset); LogME wins over ingested.
  std::map<std::pair<std::string, std::string>, const TransferRecord*> chosen;
  for (const auto& t : zoo.transfer_scores()) {
    auto key = std::make_pair(t.model_id, t.dataset_id);
    auto it = chosen.find(key);
    if (it == chosen.end() || (t.method == TransferMethod::LogME && it->second->method != TransferMethod::LogME)) {
      chosen[key] = &t;
    }
  }
  std::map<std::string, std::vector<const TransferRecord*>> by_dataset;
  for (const auto& [key, rec] : chosen) by_dataset[key.second].push_back(rec);

  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& [dataset, recs] : by_dataset) {
    std::vector<double> scores;
    for (const auto* r : recs) scores.push_back(r->score);
    const auto norm = min_max_normalize(scores);
    for (std::size_t i = 0; i < recs.size(); ++i) out[{recs[i]->model_id, dataset}] = norm[i];
  }
  return out;
}

namespace {

// Fine-tune record wins when a pair has both kinds.
std::map<std::string, std::vector<TrainingRecord>> resolved_history(const Zoo& zoo) {
  std::map<std::pair<std::string, std::string>, const TrainingRecord*> chosen;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : zoo.history()) {
    auto key = std::make_pair(r.model_id, r.dataset_id);
    auto it = chosen.find(key);
    if (it == chosen.end()) {
      chosen.emplace(key, &r);
      order.push_back(key);
    } else if (r.kind == RecordKind::Finetune) {
      it->second = &r;
    }
  }
  std::map<std::string, std::vector<TrainingRecord>> out;
  for (const auto& key : order) out[key.second].push_back(*chosen[key]);
  return out;
}

}  // namespace

ZooGraph build_graph(const Zoo& zoo, const SimilarityMatrix& phi, const GraphConfig& config,
                     const std::vector<DatasetEmbedding>& dataset_features) {
  for (double t : {config.transfer_prune_threshold, config.accuracy_prune_threshold, config.negative_accuracy_threshold}) {
    if (!(t >= 0.0 && t <= 1.0)) raise(ErrorKind::InvalidArgument, "graph thresholds must lie in [0,1]");
  }
  std::vector<NodeRef> nodes;
  for (const auto& d : zoo.datasets()) nodes.push_back(dataset_node(d.dataset_id));
  for (const auto& m : zoo.models()) nodes.push_back(model_node(m.model_id));

  const auto history = resolved_history(zoo);
  for (const auto& [dataset, recs] : history) {
    if (!phi.contains(dataset)) {
      raise(ErrorKind::IntegrityError, "dataset '" + dataset + "' has training history but no similarity entry");
    }
  }

  std::vector<ZooEdge> edges;
  const auto& datasets = zoo.datasets();
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    for (std::size_t j = 0; j < datasets.size(); ++j) {
      if (i == j) continue;
      auto w = phi.at(datasets[i].dataset_id, datasets[j].dataset_id);
      if (!w) continue;
      if (!config.dd_fully_connected && *w <= 0.0) continue;
      edges.push_back({dataset_node(datasets[i].dataset_id), dataset_node(datasets[j].dataset_id),
                       EdgeKind::DatasetSimilarity, *w, EdgeLabel::Positive});
    }
  }

  const double positive_floor = std::max(config.accuracy_prune_threshold, config.negative_accuracy_threshold);
  for (const auto& d : datasets) {
    auto it = history.find(d.dataset_id);
    if (it == history.end()) continue;
    const auto norm = normalize_accuracy(it->second);
    for (const auto& r : it->second) {
      const double w = norm.at(r.model_id);
      edges.push_back({dataset_node(d.dataset_id), model_node(r.model_id), EdgeKind::Performance, w,
                       w >= positive_floor ? EdgeLabel::Positive : EdgeLabel::Negative});
    }
  }

  const auto transfer = normalized_transfer_scores(zoo);
  for (const auto& d : datasets) {
    for (const auto& m : zoo.models()) {
      auto it = transfer.find({m.model_id, d.dataset_id});
      if (it == transfer.end() || it->second < config.transfer_prune_threshold) continue;
      edges.push_back({dataset_node(d.dataset_id), model_node(m.model_id), EdgeKind::Transfer, it->second,
                       EdgeLabel::Positive});
    }
  }

  std::map<NodeRef, Eigen::VectorXd> features;
  for (const auto& e : dataset_features) {
    if (zoo.dataset_index(e.dataset_id)) features.emplace(dataset_node(e.dataset_id), e.vector);
  }
  return {std::move(nodes), std::move(edges), std::move(features)};
}

ZooGraph remove_target_edges(const ZooGraph& graph, const std::string& target) {
  if (!graph.index_of(dataset_node(target))) raise(ErrorKind::NotFound, "dataset '" + target + "' is not in the graph");
  std::vector<ZooEdge> kept;
  kept.reserve(graph.edges().size());
  for (const auto& e : graph.edges()) {
    const bool md = e.kind != EdgeKind::DatasetSimilarity;
    const bool touches = (e.a.kind == NodeKind::Dataset && e.a.id == target) ||
                         (e.b.kind == NodeKind::Dataset && e.b.id == target);
    if (md && touches) continue;
    kept.push_back(e);
  }
  return {graph.nodes(), std::move(kept), graph.node_features()};
}

void write_graph_csv(const ZooGraph& graph, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) raise(ErrorKind::MissingInput, "cannot write " + file.string());
  csv::write_row(out, {"a_kind", "a_id", "b_kind", "b_id", "edge_kind", "weight", "label"});
  for (const auto& e : graph.edges()) {
    csv::write_row(out, {std::string(to_string(e.a.kind)), e.a.id, std::string(to_string(e.b.kind)), e.b.id,
                         std::string(to_string(e.kind)), csv::format_real(e.weight), std::string(to_string(e.label))});
  }
}

}  // namespace zgs
