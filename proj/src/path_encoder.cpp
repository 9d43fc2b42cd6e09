#include "tmer/path_encoder.hpp"

#include <algorithm>
#include <stdexcept>

namespace tmer {

EmbeddingTable train_path_tokens(const Hin &hin, const PairCorpus &corpus,
                                 const PathTokenConfig &cfg) {
  std::vector<std::vector<int>> sentences;
  // deterministic sentence order: sort pair keys
  for (const auto *map : {&corpus.user_item, &corpus.item_item}) {
    std::vector<uint64_t> keys;
    keys.reserve(map->size());
    for (const auto &[k, v] : *map) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (uint64_t k : keys)
      for (const auto &inst : map->at(k).instances)
        sentences.emplace_back(inst.nodes.begin(), inst.nodes.end());
  }
  if (sentences.empty()) throw std::invalid_argument("train_path_tokens: empty corpus");

  SkipgramConfig sg;
  sg.dim = cfg.dim;
  sg.window = cfg.window;
  sg.negatives = cfg.negatives;
  sg.epochs = cfg.epochs;
  sg.seed = cfg.seed;
  auto trained = train_skipgram(sentences, hin.num_nodes(), sg);

  std::vector<char> seen(hin.num_nodes(), 0);
  for (const auto &s : sentences)
    for (int t : s) seen[t] = 1;

  EmbeddingTable tokens(hin.num_nodes(), cfg.dim);
  for (NodeId v = 0; v < hin.num_nodes(); ++v)
    if (seen[v]) tokens.set(v, std::move(trained.vectors[v]));
  return tokens;
}

Vec encode_instance(const PathInstance &inst, const EmbeddingTable &tokens) {
  if (inst.nodes.empty()) throw std::invalid_argument("encode_instance: empty instance");
  Vec sum(tokens.dim(), 0.0);
  for (NodeId v : inst.nodes) {
    if (!tokens.has(v))
      throw std::runtime_error("encode_instance: node has no token vector: id " +
                               std::to_string(v));
    axpy(1.0, tokens.get(v), sum);
  }
  for (double &x : sum) x /= static_cast<double>(inst.nodes.size());
  return sum;
}

Mat encode_pair(const PairPathSet &set, const EmbeddingTable &tokens) {
  Mat out(static_cast<int>(set.instances.size()), tokens.dim());
  for (size_t t = 0; t < set.instances.size(); ++t) {
    Vec row = encode_instance(set.instances[t], tokens);
    std::copy(row.begin(), row.end(), out.data.begin() + t * tokens.dim());
  }
  return out;
}

} // namespace tmer
