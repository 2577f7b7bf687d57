#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "zgs/zoograph.hpp"

namespace zgs {

enum class WalkVariant { Node2Vec, Node2VecPlus };

/// Random-walk and skip-gram hyperparameters.
struct WalkConfig {
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
  int walk_length = 40;
  int walks_per_node = 10;
  int window = 5;
  int negatives_per_positive = 5;
  int dim = 128;
  int epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 42;
  WalkVariant variant = WalkVariant::Node2Vec;
  unsigned threads = 0;
};

void validate(const WalkConfig& config);

/// Weighted adjacency over the walkable (positively labeled) edges of a
/// ZooGraph. Model-dataset edges are traversed in both directions; similarity
/// weights are mapped to [0,1] by (w+1)/2. Parallel edges keep the larger weight.
class WalkGraph {
 public:
  struct Neighbor {
    std::size_t node;
    double weight;
  };

  explicit WalkGraph(const ZooGraph& graph);

  std::size_t size() const noexcept { return adjacency_.size(); }
  const std::vector<Neighbor>& neighbors(std::size_t v) const { return adjacency_[v]; }
  /// Weight of v -> x, nullopt when not adjacent.
  std::optional<double> weight(std::size_t v, std::size_t x) const;
  double mean_out_weight(std::size_t v) const { return mean_out_weight_[v]; }
  bool has_out_weight(std::size_t v) const;

  /// Unnormalized second-order transition weights from `current`, having
  /// arrived from `previous` (nullopt on the first step). Ordered by neighbor index.
  std::vector<Neighbor> transition_weights(std::optional<std::size_t> previous, std::size_t current, double p,
                                           double q, WalkVariant variant) const;

  /// Samples the next node; nullopt at a dead end.
  std::optional<std::size_t> step(std::optional<std::size_t> previous, std::size_t current, double p, double q,
                                  WalkVariant variant, std::mt19937_64& rng) const;

 private:
  std::vector<std::vector<Neighbor>> adjacency_;  // sorted by node index
  std::vector<double> mean_out_weight_;
};

/// Transition weights keyed by node. Returns an empty map when `current` is a
/// dead end (the walk simply stops there).
std::map<NodeRef, double> transition_weights(const NodeRef& previous, const NodeRef& current, const ZooGraph& graph,
                                             const WalkConfig& config, WalkVariant variant);

struct WalkSet {
  std::vector<NodeRef> nodes;                      // graph node order
  std::vector<std::vector<std::uint32_t>> walks;   // indices into `nodes`
};

/// `walks_per_node` walks from every node with a usable out-edge. Each start
/// node draws from its own seed-derived stream.
WalkSet sample_walks(const ZooGraph& graph, const WalkConfig& config);

}  // namespace zgs
