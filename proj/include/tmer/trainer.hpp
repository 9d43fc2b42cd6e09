#pragma once

#include <cstdint>
#include <vector>

#include "tmer/embedding.hpp"
#include "tmer/hin.hpp"
#include "tmer/model.hpp"
#include "tmer/path_provider.hpp"
#include "tmer/rng.hpp"

namespace tmer {

struct NegSample {
  NodeId item = -1;
  Vec item_emb;
  Mat paths; // encoded (prev item -> item), or (user -> item) at position 0
};

// One user's sequence with everything the forward pass needs precomputed.
struct SeqExample {
  NodeId user = -1;
  Vec user_emb;
  Mat user_paths;              // encoded instances user -> items[0]
  std::vector<NodeId> items;   // bridge + train, chronological
  std::vector<Vec> item_embs;
  std::vector<Mat> step_paths; // index t >= 1: (items[t-1] -> items[t])
  std::vector<int> positives;  // positions contributing loss terms
  std::vector<std::vector<NegSample>> negatives; // parallel to positives
};

struct SeqForward {
  Vec user_context;            // attention output over user_paths
  Vec user_weights;
  std::vector<Vec> contexts;   // per position >= 1
  std::vector<Vec> h1, h2;     // h1[0]/h2[0] unused; state[t] = t==0 ? first : h2[t]
  std::vector<Vec> state;
  std::vector<double> positive_scores; // parallel to ex.positives
};

// Forward pass over one sequence (no loss terms); used by the evaluator and
// the explainer as well as training.
SeqForward forward_sequence(const SeqExample &ex, const ModelParams &params,
                            Ablation mode);

struct LossGrads {
  double loss = 0.0; // mean over positives
  int n_positives = 0;
  ModelParams grads;
};

// Implicit-feedback loss with negative sampling over precomputed examples;
// gradients are exact reverse-mode for every tensor in ModelParams.
// include_positive_term=false gives the literal negatives-only loss.
LossGrads loss_and_grads(const std::vector<SeqExample> &batch, const ModelParams &params,
                         Ablation mode, bool include_positive_term = true);

// Builds the example for one user: items = bridge+train, positives as given
// (positions into items), n_neg uniform negatives per positive drawn from
// items the user never interacted with.
SeqExample build_example(const Hin &hin, const UserSequence &seq,
                         const EmbeddingTable &node_emb, PathProvider &paths,
                         const std::vector<int> &positives, int n_neg, Rng &rng);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  int64_t t = 0;
  ModelParams m, v;
  explicit AdamState(const ModelParams &shape, AdamConfig cfg = {})
      : cfg(cfg), m(zero_like(shape)), v(zero_like(shape)) {}
};

void adam_step(ModelParams &params, ModelParams &grads, AdamState &st);

struct TrainConfig {
  int epochs = 30;
  double lr = 1e-3;
  int n_neg = 4;
  Ablation mode = Ablation::Full;
  bool positive_term = true;
  uint64_t seed = 1;
  bool early_stop = false;   // holds out the last train item, stops on val HR@10
  int patience = 5;
  int val_negatives = 100;
  bool verbose = false;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_loss;
  int epochs_run = 0;
};

TrainResult train_model(const Hin &hin, const std::vector<UserSequence> &seqs,
                        const EmbeddingTable &node_emb, PathProvider &paths,
                        int dim, int heads, const TrainConfig &cfg);

} // namespace tmer
