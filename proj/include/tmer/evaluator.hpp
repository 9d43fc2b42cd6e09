#pragma once

#include <map>
#include <string>
#include <vector>

#include "tmer/trainer.hpp"

namespace tmer {

// 1-based rank of the positive after a descending-score sort; ties place the
// positive last among equals so a constant scorer cannot inflate metrics.
int rank_of(double positive_score, const std::vector<double> &negative_scores);

double hit_ratio(const std::vector<int> &ranks, int k);
// single-relevant-item NDCG: 1/log2(rank+1) within top k, else 0
double ndcg(const std::vector<int> &ranks, int k);

struct EvalConfig {
  int n_negatives = 500;
  std::vector<int> ks = {1, 5, 10, 20};
  Ablation mode = Ablation::Full;
  uint64_t seed = 1;
  int workers = 1;
};

struct RankRecord {
  NodeId user;
  NodeId positive;
  int rank;
  int n_candidates;
};

struct EvalResult {
  // K -> (HR, NDCG)
  std::map<int, std::pair<double, double>> metrics;
  std::vector<RankRecord> ranks;
};

// Scores one candidate as the next item after the user's processed
// bridge+train chain.
double score_candidate(const Hin &hin, const EmbeddingTable &node_emb,
                       PathProvider &paths, const ModelParams &params, Ablation mode,
                       const Vec &user_emb, NodeId last_item, const Vec &h_prev,
                       NodeId candidate);

// 500-negative protocol over every test item of every user. Each test item
// is an independent instance with its own uniformly drawn negatives.
EvalResult evaluate(const Hin &hin, const std::vector<UserSequence> &seqs,
                    const EmbeddingTable &node_emb, PathProvider &paths,
                    const ModelParams &params, const EvalConfig &cfg);

// {dataset, seed, K: {HR, NDCG}} as canonical JSON text
std::string metrics_report(const std::string &dataset, uint64_t seed,
                           const std::string &ablation, const EvalResult &result);

} // namespace tmer
