#pragma once

#include <mutex>
#include <unordered_map>

#include "tmer/metapath.hpp"
#include "tmer/path_encoder.hpp"

namespace tmer {

// Serves encoded path matrices for endpoint pairs. Pairs already in the
// corpus are reused; anything else (negative samples, test candidates) is
// sampled on demand and cached across callers.
class PathProvider {
public:
  PathProvider(const Hin &hin, const SimilaritySource &sim,
               std::vector<MetaPathSchema> ui_schemas,
               std::vector<MetaPathSchema> ii_schemas, int k, const PairCorpus *corpus,
               const EmbeddingTable &tokens)
      : hin_(hin), sim_(sim), ui_schemas_(std::move(ui_schemas)),
        ii_schemas_(std::move(ii_schemas)), k_(k), corpus_(corpus), tokens_(tokens) {}

  // encoded instances for (item a -> item b); |instances| x d
  const Mat &item_item(NodeId a, NodeId b);
  const Mat &user_item(NodeId u, NodeId i);

  const PairPathSet &item_item_set(NodeId a, NodeId b);
  const PairPathSet &user_item_set(NodeId u, NodeId i);

  int dim() const { return tokens_.dim(); }

private:
  struct Entry {
    PairPathSet set;
    Mat encoded;
  };
  const Entry &fetch(NodeId a, NodeId b, bool user_side);

  const Hin &hin_;
  const SimilaritySource &sim_;
  std::vector<MetaPathSchema> ui_schemas_, ii_schemas_;
  int k_;
  const PairCorpus *corpus_;
  const EmbeddingTable &tokens_;
  std::unordered_map<uint64_t, Entry> ii_cache_, ui_cache_;
  std::mutex mu_;
};

} // namespace tmer
