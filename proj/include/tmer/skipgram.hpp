#pragma once

#include <cstdint>
#include <vector>

#include "tmer/linalg.hpp"

namespace tmer {

struct SkipgramConfig {
  int dim = 100;
  int window = 5;    // max context offset; shrunk per center as in word2vec
  int negatives = 5; // negative samples per center-context pair
  int epochs = 5;
  double lr_start = 0.025;
  double lr_end = 0.0001;
  uint64_t seed = 1;
};

struct SkipgramResult {
  std::vector<Vec> vectors;        // one per vocab id (input embeddings)
  std::vector<double> epoch_loss;  // mean pair loss per epoch
};

// Skip-gram with negative sampling over integer-token sentences.
// Single-threaded; bit-for-bit deterministic under a fixed seed.
// Negatives are drawn from the plain unigram distribution of the corpus.
// Tokens absent from the corpus keep their word2vec-style uniform init
// in [-0.5/dim, 0.5/dim].
SkipgramResult train_skipgram(const std::vector<std::vector<int>> &sentences,
                              int vocab_size, const SkipgramConfig &cfg);

} // namespace tmer
