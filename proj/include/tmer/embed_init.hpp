#pragma once

#include <cstdint>
#include <vector>

#include "tmer/embedding.hpp"
#include "tmer/hin.hpp"
#include "tmer/skipgram.hpp"

namespace tmer {

struct WalkConfig {
  int walks_per_node = 10;
  int walk_length = 40;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  uint64_t seed = 1;
};

// Truncated random walks over Buy edges only (user-item bipartite subgraph).
// One batch of walks_per_node walks per User and Item node. A node with no
// Buy neighbor yields the length-1 walk [node].
std::vector<std::vector<NodeId>> generate_walks(const Hin &hin, const WalkConfig &cfg,
                                                int workers = 1);

struct EmbedInitResult {
  EmbeddingTable embeddings;          // users and items only
  std::vector<NodeId> untrained;      // nodes absent from every walk (random init)
  std::vector<double> epoch_loss;
};

// Skip-gram over the walk corpus; covers every User/Item node (random init
// fallback for nodes that never appeared in a walk, recorded in `untrained`).
EmbedInitResult train_node_embeddings(const Hin &hin,
                                      const std::vector<std::vector<NodeId>> &walks,
                                      int dim, const WalkConfig &cfg);

} // namespace tmer
