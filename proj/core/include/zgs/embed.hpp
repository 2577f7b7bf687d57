#pragma once

#include <optional>
#include <string_view>

#include "zgs/embedding_table.hpp"
#include "zgs/gnn.hpp"
#include "zgs/skipgram.hpp"
#include "zgs/walks.hpp"

namespace zgs {

enum class EmbedderKind { Node2Vec, Node2VecPlus, GraphSage, Gat };

std::string_view to_string(EmbedderKind k);
std::optional<EmbedderKind> parse_embedder(std::string_view s);

/// Runs the chosen graph learner. Walk learners use `walk`; GNNs use `gnn`
/// with the state width taken from `walk.dim`.
EmbeddingTable learn_embeddings(const ZooGraph& graph, EmbedderKind kind, const WalkConfig& walk, const GnnConfig& gnn);

}  // namespace zgs
