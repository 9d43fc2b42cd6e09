#include "tmer/path_provider.hpp"

namespace tmer {

const PathProvider::Entry &PathProvider::fetch(NodeId a, NodeId b, bool user_side) {
  auto &cache = user_side ? ui_cache_ : ii_cache_;
  uint64_t key = PairCorpus::key(a, b);
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  Entry e;
  const PairPathSet *from_corpus = nullptr;
  if (corpus_)
    from_corpus = user_side ? corpus_->find_user_item(a, b) : corpus_->find_item_item(a, b);
  if (from_corpus)
    e.set = *from_corpus;
  else
    e.set = sample_pair(hin_, sim_, user_side ? ui_schemas_ : ii_schemas_, a, b, k_);
  // on-demand pairs may route through nodes the path-token training never
  // saw; such instances cannot be encoded and carry no usable evidence
  std::erase_if(e.set.instances, [&](const PathInstance &inst) {
    for (NodeId v : inst.nodes)
      if (!tokens_.has(v)) return true;
    return false;
  });
  e.encoded = encode_pair(e.set, tokens_);
  return cache.emplace(key, std::move(e)).first->second;
}

const Mat &PathProvider::item_item(NodeId a, NodeId b) { return fetch(a, b, false).encoded; }
const Mat &PathProvider::user_item(NodeId u, NodeId i) { return fetch(u, i, true).encoded; }
const PairPathSet &PathProvider::item_item_set(NodeId a, NodeId b) {
  return fetch(a, b, false).set;
}
const PairPathSet &PathProvider::user_item_set(NodeId u, NodeId i) {
  return fetch(u, i, true).set;
}

} // namespace tmer
