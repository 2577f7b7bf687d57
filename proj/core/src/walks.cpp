#include "zgs/walks.hpp"

#include <algorithm>

#include "zgs/error.hpp"
#include "zgs/parallel.hpp"
#include "zgs/rng.hpp"

namespace zgs {

void validate(const WalkConfig& c) {
  if (!(c.p > 0.0) || !(c.q > 0.0)) raise(ErrorKind::InvalidArgument, "walk parameters p and q must be positive");
  if (c.walk_length < 1 || c.walks_per_node < 1 || c.window < 1 || c.negatives_per_positive < 1 || c.dim < 1 ||
      c.epochs < 1) {
    raise(ErrorKind::InvalidArgument, "walk/skip-gram integer parameters must be positive");
  }
  if (!(c.learning_rate > 0.0)) raise(ErrorKind::InvalidArgument, "learning_rate must be positive");
}

WalkGraph::WalkGraph(const ZooGraph& graph) : adjacency_(graph.nodes().size()) {
  std::vector<std::map<std::size_t, double>> adj(graph.nodes().size());
  auto link = [&](std::size_t from, std::size_t to, double w) {
    auto [it, inserted] = adj[from].emplace(to, w);
    if (!inserted) it->second = std::max(it->second, w);
  };
  for (const auto& e : graph.edges()) {
    if (e.label != EdgeLabel::Positive) continue;
    const auto a = *graph.index_of(e.a);
    const auto b = *graph.index_of(e.b);
    if (e.kind == EdgeKind::DatasetSimilarity) {
      link(a, b, std::clamp((e.weight + 1.0) / 2.0, 0.0, 1.0));
    } else {
      const double w = std::clamp(e.weight, 0.0, 1.0);
      link(a, b, w);
      link(b, a, w);
    }
  }
  mean_out_weight_.assign(adj.size(), 0.0);
  for (std::size_t v = 0; v < adj.size(); ++v) {
    double total = 0.0;
    for (const auto& [x, w] : adj[v]) {
      adjacency_[v].push_back({x, w});
      total += w;
    }
    if (!adj[v].empty()) mean_out_weight_[v] = total / static_cast<double>(adj[v].size());
  }
}

std::optional<double> WalkGraph::weight(std::size_t v, std::size_t x) const {
  const auto& n = adjacency_[v];
  auto it = std::lower_bound(n.begin(), n.end(), x, [](const Neighbor& a, std::size_t b) { return a.node < b; });
  if (it == n.end() || it->node != x) return std::nullopt;
  return it->weight;
}

bool WalkGraph::has_out_weight(std::size_t v) const {
  return std::any_of(adjacency_[v].begin(), adjacency_[v].end(), [](const Neighbor& n) { return n.weight > 0.0; });
}

std::vector<WalkGraph::Neighbor> WalkGraph::transition_weights(std::optional<std::size_t> previous, std::size_t current,
                                                               double p, double q, WalkVariant variant) const {
  std::vector<Neighbor> out;
  out.reserve(adjacency_[current].size());
  for (const auto& [x, w] : adjacency_[current]) {
    double bias = 1.0;
    if (previous) {
      const auto t = *previous;
      if (x == t) {
        bias = 1.0 / p;
      } else {
        auto wt = weight(t, x);
        bool adjacent = wt.has_value();
        if (adjacent && variant == WalkVariant::Node2VecPlus) adjacent = *wt >= mean_out_weight_[t];
        bias = adjacent ? 1.0 : 1.0 / q;
      }
    }
    out.push_back({x, bias * w});
  }
  return out;
}

std::optional<std::size_t> WalkGraph::step(std::optional<std::size_t> previous, std::size_t current, double p,
                                           double q, WalkVariant variant, std::mt19937_64& rng) const {
  const auto weights = transition_weights(previous, current, p, q, variant);
  double total = 0.0;
  for (const auto& n : weights) total += n.weight;
  if (!(total > 0.0)) return std::nullopt;
  const double r = uniform01(rng) * total;
  double acc = 0.0;
  for (const auto& n : weights) {
    acc += n.weight;
    if (r < acc) return n.node;
  }
  // Round-off: fall back to the last neighbor with positive weight.
  for (auto it = weights.rbegin(); it != weights.rend(); ++it) {
    if (it->weight > 0.0) return it->node;
  }
  return std::nullopt;
}

std::map<NodeRef, double> transition_weights(const NodeRef& previous, const NodeRef& current, const ZooGraph& graph,
                                             const WalkConfig& config, WalkVariant variant) {
  auto t = graph.index_of(previous);
  auto v = graph.index_of(current);
  if (!t || !v) raise(ErrorKind::NotFound, "node not in graph");
  const WalkGraph wg(graph);
  std::map<NodeRef, double> out;
  if (!wg.has_out_weight(*v)) return out;
  for (const auto& n : wg.transition_weights(t, *v, config.p, config.q, variant)) out[graph.nodes()[n.node]] = n.weight;
  return out;
}

WalkSet sample_walks(const ZooGraph& graph, const WalkConfig& config) {
  validate(config);
  const WalkGraph wg(graph);
  std::vector<std::size_t> starts;
  for (std::size_t v = 0; v < wg.size(); ++v) {
    if (wg.has_out_weight(v)) starts.push_back(v);
  }
  if (starts.empty()) raise(ErrorKind::EmptyGraph, "graph has no positive edges to walk");

  std::vector<std::vector<std::vector<std::uint32_t>>> per_start(starts.size());
  parallel_for(starts.size(), config.threads, [&](std::size_t s) {
    auto rng = make_rng(config.seed, starts[s]);
    auto& walks = per_start[s];
    walks.reserve(static_cast<std::size_t>(config.walks_per_node));
    for (int w = 0; w < config.walks_per_node; ++w) {
      std::vector<std::uint32_t> walk{static_cast<std::uint32_t>(starts[s])};
      std::optional<std::size_t> prev;
      std::size_t cur = starts[s];
      while (static_cast<int>(walk.size()) < config.walk_length) {
        auto next = wg.step(prev, cur, config.p, config.q, config.variant, rng);
        if (!next) break;
        walk.push_back(static_cast<std::uint32_t>(*next));
        prev = cur;
        cur = *next;
      }
      walks.push_back(std::move(walk));
    }
  });

  WalkSet out;
  out.nodes = graph.nodes();
  for (auto& walks : per_start) {
    for (auto& w : walks) out.walks.push_back(std::move(w));
  }
  return out;
}

}  // namespace zgs
