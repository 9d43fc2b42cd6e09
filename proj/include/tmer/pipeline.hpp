#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "tmer/model.hpp"

namespace tmer {

// Everything a pipeline run needs, resolved from CLI flags and/or a config
// file by the driver. Stages communicate through files under workdir.
struct PipelineConfig {
  std::string workdir = ".";
  std::string interactions;
  std::string metadata;
  std::string dataset = "dataset";
  uint64_t seed = 1;
  int dim = 100;
  int heads = 4;
  int k_paths = 5;
  int n_neg = 4;
  double lr = 1e-3;
  int epochs = 30;
  int min_interactions = 12;
  Ablation ablation = Ablation::Full;
  bool paper_literal_loss = false;
  int workers = 1;
  int eval_negatives = 500;

  int walks_per_node = 10;
  int walk_length = 40;
  int sg_window = 5;
  int sg_negatives = 5;
  int sg_epochs = 5;
  int path_window = 2;
  int path_epochs = 20;
  bool early_stop = false;
  int explain_top_k = 10;

  std::string hin_file() const { return workdir + "/hin.txt"; }
  std::string sequences_file() const { return workdir + "/sequences.tsv"; }
  std::string node_emb_file() const { return workdir + "/node_embeddings.txt"; }
  std::string node_emb_bin() const { return workdir + "/node_embeddings.bin"; }
  std::string corpus_file() const { return workdir + "/path_corpus.tsv"; }
  std::string token_emb_file() const { return workdir + "/path_tokens.txt"; }
  std::string token_emb_bin() const { return workdir + "/path_tokens.bin"; }
  std::string checkpoint_file() const { return workdir + "/checkpoint.bin"; }
  std::string metrics_file() const { return workdir + "/metrics.json"; }
  std::string ranks_file() const { return workdir + "/ranks.tsv"; }
  std::string explanations_file() const { return workdir + "/explanations.txt"; }

  std::string describe() const;
};

// Each stage reads its declared inputs, writes its declared outputs, and
// throws PipelineError with a "run stage X first" message when an upstream
// artifact is missing. Returned strings are human-readable summaries.
struct PipelineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string stage_prepare(const PipelineConfig &cfg);
std::string stage_init_embed(const PipelineConfig &cfg);
std::string stage_sample_paths(const PipelineConfig &cfg);
std::string stage_encode_paths(const PipelineConfig &cfg);
std::string stage_train(const PipelineConfig &cfg);
std::string stage_evaluate(const PipelineConfig &cfg);
std::string stage_explain(const PipelineConfig &cfg);
std::string run_all(const PipelineConfig &cfg);

} // namespace tmer
