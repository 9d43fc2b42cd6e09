#include "tmer/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "tmer/rng.hpp"

namespace tmer {

int rank_of(double positive_score, const std::vector<double> &negative_scores) {
  int greater = 0, equal = 0;
  for (double s : negative_scores) {
    if (s > positive_score)
      greater++;
    else if (s == positive_score)
      equal++;
  }
  return greater + equal + 1;
}

double hit_ratio(const std::vector<int> &ranks, int k) {
  if (ranks.empty()) return 0.0;
  int hits = 0;
  for (int r : ranks)
    if (r <= k) hits++;
  return static_cast<double>(hits) / ranks.size();
}

double ndcg(const std::vector<int> &ranks, int k) {
  if (ranks.empty()) return 0.0;
  double sum = 0.0;
  for (int r : ranks)
    if (r <= k) sum += 1.0 / std::log2(r + 1.0);
  return sum / ranks.size();
}

double score_candidate(const Hin &, const EmbeddingTable &node_emb, PathProvider &paths,
                       const ModelParams &params, Ablation mode, const Vec &user_emb,
                       NodeId last_item, const Vec &h_prev, NodeId candidate) {
  Vec c(params.dim, 0.0);
  const Mat &pm = paths.item_item(last_item, candidate);
  if (mode != Ablation::RII && pm.rows > 0)
    c = self_attend(pm, params.item_item_att).context;
  UpdateOut uo = update_item(h_prev, node_emb.get(candidate), c, params.gates);
  return score(user_emb, uo.h1, uo.h2, params.mlp);
}

EvalResult evaluate(const Hin &hin, const std::vector<UserSequence> &seqs,
                    const EmbeddingTable &node_emb, PathProvider &paths,
                    const ModelParams &params, const EvalConfig &cfg) {
  EvalResult res;

  std::vector<NodeId> all_items;
  for (NodeId v = 0; v < hin.num_nodes(); ++v)
    if (hin.type_of(v) == NodeType::Item) all_items.push_back(v);

  for (size_t ui = 0; ui < seqs.size(); ++ui) {
    const UserSequence &seq = seqs[ui];
    if (seq.test.empty()) continue;
    Rng dummy(0);
    SeqExample ex = build_example(hin, seq, node_emb, paths, {}, 0, dummy);
    SeqForward fw = forward_sequence(ex, params, cfg.mode);
    NodeId last_item = ex.items.back();
    const Vec &h_prev = fw.state.back();

    std::unordered_set<NodeId> interacted(seq.bridge.begin(), seq.bridge.end());
    interacted.insert(seq.train.begin(), seq.train.end());
    interacted.insert(seq.test.begin(), seq.test.end());
    std::vector<NodeId> pool;
    for (NodeId v : all_items)
      if (!interacted.count(v)) pool.push_back(v);

    for (size_t ti = 0; ti < seq.test.size(); ++ti) {
      NodeId positive = seq.test[ti];
      Rng rng(derive_seed(cfg.seed, 0xE7A10000ULL + ui * 1009ULL + ti));
      int n = std::min<int>(cfg.n_negatives, static_cast<int>(pool.size()));
      // distinct uniform negatives
      std::unordered_set<NodeId> chosen;
      std::vector<NodeId> negs;
      while (static_cast<int>(negs.size()) < n) {
        NodeId j = pool[rng.uniform_int(pool.size())];
        if (chosen.insert(j).second) negs.push_back(j);
      }
      double ps = score_candidate(hin, node_emb, paths, params, cfg.mode, ex.user_emb,
                                  last_item, h_prev, positive);
      std::vector<double> ns;
      ns.reserve(negs.size());
      for (NodeId j : negs)
        ns.push_back(score_candidate(hin, node_emb, paths, params, cfg.mode, ex.user_emb,
                                     last_item, h_prev, j));
      res.ranks.push_back({seq.user, positive, rank_of(ps, ns), n + 1});
    }
  }

  std::vector<int> ranks;
  ranks.reserve(res.ranks.size());
  for (const auto &r : res.ranks) ranks.push_back(r.rank);
  for (int k : cfg.ks) res.metrics[k] = {hit_ratio(ranks, k), ndcg(ranks, k)};
  return res;
}

std::string metrics_report(const std::string &dataset, uint64_t seed,
                           const std::string &ablation, const EvalResult &result) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  os << "{\n";
  os << "  \"dataset\": \"" << dataset << "\",\n";
  os << "  \"seed\": " << seed << ",\n";
  os << "  \"ablation\": \"" << ablation << "\",\n";
  os << "  \"instances\": " << result.ranks.size() << ",\n";
  os << "  \"metrics\": {\n";
  size_t i = 0;
  for (const auto &[k, hr_ndcg] : result.metrics) {
    os << "    \"" << k << "\": {\"HR\": " << hr_ndcg.first
       << ", \"NDCG\": " << hr_ndcg.second << "}";
    os << (++i == result.metrics.size() ? "\n" : ",\n");
  }
  os << "  }\n}\n";
  return os.str();
}

} // namespace tmer
