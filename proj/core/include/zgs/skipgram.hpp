#pragma once

#include <vector>

#include "zgs/embedding_table.hpp"
#include "zgs/walks.hpp"

namespace zgs {

struct SkipGramTrace {
  std::vector<double> epoch_loss;  // mean negative-sampling loss per (center, context) pair
};

/// Skip-gram with negative sampling over walk co-occurrences within `window`.
/// Noise distribution is proportional to node frequency^0.75 in the walks;
/// the learning rate decays linearly to 1e-4 of its start value. Returns the
/// center vectors for every node in `walks.nodes`.
EmbeddingTable train_skipgram(const WalkSet& walks, const WalkConfig& config, SkipGramTrace* trace = nullptr);

}  // namespace zgs
