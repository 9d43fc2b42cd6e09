#pragma once

#include "tmer/embedding.hpp"
#include "tmer/metapath.hpp"
#include "tmer/skipgram.hpp"

namespace tmer {

struct PathTokenConfig {
  int dim = 100;
  int window = 2; // paths are 3..6 tokens long
  int negatives = 5;
  int epochs = 20;
  uint64_t seed = 1;
};

// Paths as sentences, nodes as tokens. Trains a fresh skip-gram space over
// the path corpus; this is how Brand/Category nodes get vectors at all.
EmbeddingTable train_path_tokens(const Hin &hin, const PairCorpus &corpus,
                                 const PathTokenConfig &cfg);

// Elementwise mean of the token vectors along the instance.
// Throws if any node lacks a token vector.
Vec encode_instance(const PathInstance &inst, const EmbeddingTable &tokens);

// Row t = encode_instance(instances[t]); empty set -> 0 x d matrix.
Mat encode_pair(const PairPathSet &set, const EmbeddingTable &tokens);

} // namespace tmer
