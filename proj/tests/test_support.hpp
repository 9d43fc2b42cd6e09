#pragma once

#include <string>
#include <vector>

#include "tmer/embedding.hpp"
#include "tmer/hin.hpp"
#include "tmer/metapath.hpp"
#include "tmer/rng.hpp"

namespace tmer::test {

// 6-node fixture: u1,u2 / i1,i2 / b1 / c1
// edges: u1-i1(t1) u1-i2(t2) u2-i1(t3) b1-i1 b1-i2 c1-i1
struct ToyHin {
  Hin hin;
  NodeId u1, u2, i1, i2, b1, c1;
};

inline ToyHin make_toy_hin() {
  ToyHin t;
  t.u1 = t.hin.add_node("u1", NodeType::User);
  t.u2 = t.hin.add_node("u2", NodeType::User);
  t.i1 = t.hin.add_node("i1", NodeType::Item);
  t.i2 = t.hin.add_node("i2", NodeType::Item);
  t.b1 = t.hin.add_node("b1", NodeType::Brand);
  t.c1 = t.hin.add_node("c1", NodeType::Category);
  t.hin.add_edge(t.u1, t.i1, {RelKind::Buy, 1});
  t.hin.add_edge(t.u1, t.i2, {RelKind::Buy, 2});
  t.hin.add_edge(t.u2, t.i1, {RelKind::Buy, 3});
  t.hin.add_edge(t.b1, t.i1, {RelKind::IsBrandOf, 0});
  t.hin.add_edge(t.b1, t.i2, {RelKind::IsBrandOf, 0});
  t.hin.add_edge(t.c1, t.i1, {RelKind::InCategory, 0});
  t.hin.finalize();
  return t;
}

inline EmbeddingTable random_embeddings(const Hin &hin, int dim, uint64_t seed,
                                        bool all_types = true) {
  Rng rng(seed);
  EmbeddingTable tab(hin.num_nodes(), dim);
  for (NodeId v = 0; v < hin.num_nodes(); ++v) {
    NodeType t = hin.type_of(v);
    if (!all_types && t != NodeType::User && t != NodeType::Item) continue;
    Vec e(dim);
    for (double &x : e) x = rng.uniform(-1.0, 1.0);
    tab.set(v, std::move(e));
  }
  return tab;
}

// random HIN: every item gets one brand and one category; buys random
inline Hin make_random_hin(int n_users, int n_items, int n_brands, int n_cats,
                           int buys_per_user, uint64_t seed) {
  Hin h;
  Rng rng(seed);
  std::vector<NodeId> users, items, brands, cats;
  for (int i = 0; i < n_users; ++i) users.push_back(h.add_node("u" + std::to_string(i), NodeType::User));
  for (int i = 0; i < n_items; ++i) items.push_back(h.add_node("i" + std::to_string(i), NodeType::Item));
  for (int i = 0; i < n_brands; ++i) brands.push_back(h.add_node("b" + std::to_string(i), NodeType::Brand));
  for (int i = 0; i < n_cats; ++i) cats.push_back(h.add_node("c" + std::to_string(i), NodeType::Category));
  for (NodeId it : items) {
    h.add_edge(brands[rng.uniform_int(brands.size())], it, {RelKind::IsBrandOf, 0});
    h.add_edge(cats[rng.uniform_int(cats.size())], it, {RelKind::InCategory, 0});
  }
  for (NodeId u : users) {
    std::vector<char> bought(n_items, 0);
    for (int b = 0; b < buys_per_user; ++b) {
      int it = static_cast<int>(rng.uniform_int(n_items));
      if (bought[it]) continue;
      bought[it] = 1;
      h.add_edge(u, items[it], {RelKind::Buy, b});
    }
  }
  h.finalize();
  return h;
}

// Exhaustive schema-conforming path enumeration; the independent oracle for
// the beam sampler. DFS over typed neighbors, scored with the same
// SimilaritySource hop scores.
inline void enumerate_rec(const Hin &hin, const SimilaritySource &sim,
                          const MetaPathSchema &schema, NodeId end, size_t pos,
                          std::vector<NodeId> &stack, double score,
                          std::vector<PathInstance> &out) {
  if (pos + 1 == schema.types.size()) {
    if (stack.back() == end) out.push_back({schema.str(), stack, score});
    return;
  }
  for (NodeId nxt : hin.neighbors(stack.back(), schema.types[pos + 1])) {
    stack.push_back(nxt);
    enumerate_rec(hin, sim, schema, end, pos + 1, stack,
                  score * sim.hop_score(stack[stack.size() - 2], nxt), out);
    stack.pop_back();
  }
}

inline std::vector<PathInstance> enumerate_instances(const Hin &hin,
                                                     const SimilaritySource &sim,
                                                     const MetaPathSchema &schema,
                                                     NodeId start, NodeId end) {
  std::vector<PathInstance> out;
  std::vector<NodeId> stack{start};
  enumerate_rec(hin, sim, schema, end, 0, stack, 1.0, out);
  return out;
}

} // namespace tmer::test
