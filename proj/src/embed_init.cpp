#include "tmer/embed_init.hpp"

#include <stdexcept>
#include <thread>

#include "tmer/rng.hpp"

namespace tmer {

std::vector<std::vector<NodeId>> generate_walks(const Hin &hin, const WalkConfig &cfg,
                                                int workers) {
  if (cfg.walks_per_node <= 0 || cfg.walk_length <= 0)
    throw std::invalid_argument("generate_walks: bad config");
  if (cfg.window >= cfg.walk_length)
    throw std::invalid_argument("generate_walks: window must be < walk_length");

  // buy-only adjacency
  std::vector<std::vector<NodeId>> buy(hin.num_nodes());
  for (NodeId v = 0; v < hin.num_nodes(); ++v)
    for (const Edge &e : hin.edges_of(v))
      if (e.rel.kind == RelKind::Buy) buy[v].push_back(e.neighbor);

  std::vector<NodeId> starts;
  for (NodeId v = 0; v < hin.num_nodes(); ++v) {
    NodeType t = hin.type_of(v);
    if (t == NodeType::User || t == NodeType::Item) starts.push_back(v);
  }

  std::vector<std::vector<NodeId>> walks(starts.size() * cfg.walks_per_node);
  auto run = [&](size_t begin, size_t end) {
    for (size_t si = begin; si < end; ++si) {
      NodeId start = starts[si];
      for (int w = 0; w < cfg.walks_per_node; ++w) {
        // per-(node,walk) stream keeps output identical at any worker count
        Rng rng(derive_seed(cfg.seed, (static_cast<uint64_t>(start) << 20) | w));
        std::vector<NodeId> walk{start};
        NodeId cur = start;
        for (int step = 1; step < cfg.walk_length; ++step) {
          const auto &nbrs = buy[cur];
          if (nbrs.empty()) break;
          cur = nbrs[rng.uniform_int(nbrs.size())];
          walk.push_back(cur);
        }
        walks[si * cfg.walks_per_node + w] = std::move(walk);
      }
    }
  };

  if (workers <= 1) {
    run(0, starts.size());
  } else {
    std::vector<std::thread> pool;
    size_t chunk = (starts.size() + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
      size_t b = t * chunk, e = std::min(starts.size(), b + chunk);
      if (b >= e) break;
      pool.emplace_back(run, b, e);
    }
    for (auto &th : pool) th.join();
  }
  return walks;
}

EmbedInitResult train_node_embeddings(const Hin &hin,
                                      const std::vector<std::vector<NodeId>> &walks,
                                      int dim, const WalkConfig &cfg) {
  if (walks.empty()) throw std::invalid_argument("train_node_embeddings: no walks");

  std::vector<std::vector<int>> sentences(walks.size());
  for (size_t i = 0; i < walks.size(); ++i)
    sentences[i].assign(walks[i].begin(), walks[i].end());

  SkipgramConfig sg;
  sg.dim = dim;
  sg.window = cfg.window;
  sg.negatives = cfg.negatives;
  sg.epochs = cfg.epochs;
  sg.seed = derive_seed(cfg.seed, 0xe5b);
  auto trained = train_skipgram(sentences, hin.num_nodes(), sg);

  std::vector<char> seen(hin.num_nodes(), 0);
  for (const auto &w : walks)
    for (NodeId v : w) seen[v] = 1;

  EmbedInitResult res;
  res.embeddings = EmbeddingTable(hin.num_nodes(), dim);
  res.epoch_loss = trained.epoch_loss;
  for (NodeId v = 0; v < hin.num_nodes(); ++v) {
    NodeType t = hin.type_of(v);
    if (t != NodeType::User && t != NodeType::Item) continue;
    res.embeddings.set(v, std::move(trained.vectors[v]));
    if (!seen[v]) res.untrained.push_back(v);
  }
  return res;
}

} // namespace tmer
