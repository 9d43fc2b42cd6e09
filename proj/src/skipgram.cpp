#include "tmer/skipgram.hpp"

#include <cmath>
#include <stdexcept>

#include "tmer/rng.hpp"

namespace tmer {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

SkipgramResult train_skipgram(const std::vector<std::vector<int>> &sentences,
                              int vocab_size, const SkipgramConfig &cfg) {
  if (sentences.empty()) throw std::invalid_argument("skipgram: empty corpus");
  if (cfg.dim <= 0 || cfg.window <= 0 || cfg.negatives <= 0 || cfg.epochs <= 0)
    throw std::invalid_argument("skipgram: bad config");

  Rng rng(cfg.seed);
  const int d = cfg.dim;

  SkipgramResult res;
  res.vectors.assign(vocab_size, Vec(d));
  std::vector<Vec> ctx(vocab_size, Vec(d, 0.0));
  for (int v = 0; v < vocab_size; ++v)
    for (int j = 0; j < d; ++j)
      res.vectors[v][j] = (rng.uniform() - 0.5) / d;

  // unigram negative-sampling table
  std::vector<int64_t> counts(vocab_size, 0);
  int64_t total_tokens = 0;
  for (const auto &s : sentences)
    for (int t : s) {
      if (t < 0 || t >= vocab_size) throw std::invalid_argument("skipgram: token out of range");
      counts[t]++;
      total_tokens++;
    }
  std::vector<int> neg_table;
  neg_table.reserve(1 << 20);
  const int table_size = 1 << 20;
  {
    // proportional allocation, at least one slot per seen token
    for (int v = 0; v < vocab_size; ++v) {
      if (counts[v] == 0) continue;
      int slots = static_cast<int>(static_cast<double>(counts[v]) / total_tokens * table_size);
      if (slots < 1) slots = 1;
      for (int s = 0; s < slots; ++s) neg_table.push_back(v);
    }
  }

  int64_t total_centers = static_cast<int64_t>(total_tokens) * cfg.epochs;
  int64_t processed = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    int64_t loss_pairs = 0;
    for (const auto &sent : sentences) {
      const int len = static_cast<int>(sent.size());
      for (int pos = 0; pos < len; ++pos) {
        double progress = static_cast<double>(processed) / total_centers;
        double lr = cfg.lr_start + (cfg.lr_end - cfg.lr_start) * progress;
        processed++;
        int center = sent[pos];
        int b = 1 + static_cast<int>(rng.uniform_int(cfg.window));
        for (int off = -b; off <= b; ++off) {
          if (off == 0) continue;
          int cpos = pos + off;
          if (cpos < 0 || cpos >= len) continue;
          int context = sent[cpos];
          Vec &vin = res.vectors[center];
          Vec grad_in(d, 0.0);
          for (int k = 0; k <= cfg.negatives; ++k) {
            int target;
            double label;
            if (k == 0) {
              target = context;
              label = 1.0;
            } else {
              target = neg_table[rng.uniform_int(neg_table.size())];
              if (target == context) continue;
              label = 0.0;
            }
            Vec &vout = ctx[target];
            double f = sigmoid(dot(vin, vout));
            loss_sum += label > 0.5 ? -std::log(std::max(f, 1e-12))
                                    : -std::log(std::max(1.0 - f, 1e-12));
            loss_pairs++;
            double g = (label - f) * lr;
            for (int j = 0; j < d; ++j) {
              grad_in[j] += g * vout[j];
              vout[j] += g * vin[j];
            }
          }
          for (int j = 0; j < d; ++j) vin[j] += grad_in[j];
        }
      }
    }
    res.epoch_loss.push_back(loss_pairs ? loss_sum / loss_pairs : 0.0);
  }
  return res;
}

} // namespace tmer
