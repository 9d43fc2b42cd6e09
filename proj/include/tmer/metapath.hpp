#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "tmer/embedding.hpp"
#include "tmer/hin.hpp"

namespace tmer {

// A sequence of node types, e.g. UIBI or ICICI. 3 to 6 hops worth of nodes;
// consecutive types must be connectable by some relation.
struct MetaPathSchema {
  std::vector<NodeType> types;

  static MetaPathSchema parse(const std::string &s);
  std::string str() const;
  int length() const { return static_cast<int>(types.size()); }
  int hops() const { return length() - 1; }
  bool is_user_item() const {
    return types.front() == NodeType::User && types.back() == NodeType::Item;
  }
  bool is_item_item() const {
    return types.front() == NodeType::Item && types.back() == NodeType::Item;
  }
};

struct PathInstance {
  std::string schema;        // schema string, e.g. "IBI"
  std::vector<NodeId> nodes; // |nodes| == schema length
  double score = 0.0;        // product of per-hop scores, each in [0,1]

  // per-hop geometric mean; comparable across schemas of different length
  double rank_score() const;
};

struct PairPathSet {
  NodeId from = -1;
  NodeId to = -1;
  std::vector<PathInstance> instances; // sorted by rank_score descending
  bool empty() const { return instances.empty(); }
};

// Cosine similarity; 0 when either vector has zero norm.
// Throws on dimension mismatch or non-finite input.
double hop_similarity(const Vec &a, const Vec &b);

// Hop priority used by the sampler. Both endpoints embedded: cosine mapped
// to [0,1] via (1+cos)/2. Otherwise falls back to a degree prior for the
// entered node (brand/category nodes have no walk embeddings on the first
// corpus pass).
class SimilaritySource {
public:
  SimilaritySource(const Hin &hin, const EmbeddingTable &primary,
                   const EmbeddingTable *secondary = nullptr)
      : hin_(hin), primary_(primary), secondary_(secondary) {}

  double hop_score(NodeId from, NodeId to) const;

private:
  const Vec *find(NodeId v) const;
  const Hin &hin_;
  const EmbeddingTable &primary_;
  const EmbeddingTable *secondary_;
};

// Both-ends beam search: top-k start sub-paths forward, top-k end sub-paths
// backward, joined on the middle hop, at most k complete instances kept.
PairPathSet sample_instances(const Hin &hin, const SimilaritySource &sim,
                             const MetaPathSchema &schema, NodeId start, NodeId end,
                             int k);

// Pools instances across all given schemas for one endpoint pair, truncated
// to top-k by rank_score.
PairPathSet sample_pair(const Hin &hin, const SimilaritySource &sim,
                        const std::vector<MetaPathSchema> &schemas, NodeId start,
                        NodeId end, int k);

struct PairCorpus {
  int k = 5;
  // key = (from << 32) | to
  std::unordered_map<uint64_t, PairPathSet> user_item;
  std::unordered_map<uint64_t, PairPathSet> item_item;

  static uint64_t key(NodeId from, NodeId to) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(from)) << 32) |
           static_cast<uint32_t>(to);
  }
  const PairPathSet *find_user_item(NodeId u, NodeId i) const;
  const PairPathSet *find_item_item(NodeId a, NodeId b) const;
};

// For every user: one user-item set (user -> first item of bridge+train) and
// one item-item set per consecutive pair in bridge+train. Pair sets are
// shared across users that induce the same pair.
PairCorpus build_pair_corpus(const Hin &hin, const SimilaritySource &sim,
                             const std::vector<UserSequence> &seqs,
                             const std::vector<MetaPathSchema> &ui_schemas,
                             const std::vector<MetaPathSchema> &ii_schemas, int k,
                             int workers = 1);

void save_pair_corpus(const Hin &hin, const std::vector<UserSequence> &seqs,
                      const PairCorpus &corpus, const std::string &path);
PairCorpus load_pair_corpus(const Hin &hin, const std::string &path, int k);

// The schema lists used for the Amazon-style datasets.
std::vector<MetaPathSchema> default_user_item_schemas();
std::vector<MetaPathSchema> default_item_item_schemas();

} // namespace tmer
