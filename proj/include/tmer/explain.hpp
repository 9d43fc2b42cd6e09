#pragma once

#include <string>
#include <vector>

#include "tmer/trainer.hpp"

namespace tmer {

struct ExplainedPath {
  std::string schema;
  std::vector<std::string> node_keys;
  double weight;
};

// Attention-weighted item-item paths backing one recommendation. Weights are
// exactly the attention masses of the forward pass; they sum to 1 when any
// path exists.
struct ExplanationRecord {
  std::string user_key;
  std::string from_item_key;
  std::string to_item_key;
  bool no_evidence = false;
  std::vector<ExplainedPath> paths; // sorted by weight descending
};

ExplanationRecord explain_pair(const Hin &hin, PathProvider &paths,
                               const ModelParams &params, NodeId user, NodeId from_item,
                               NodeId to_item);

// One record per recommended item; pair = (last consumed item -> recommendation).
std::vector<ExplanationRecord> explain_topk(const Hin &hin, PathProvider &paths,
                                            const ModelParams &params, NodeId user,
                                            NodeId last_item,
                                            const std::vector<NodeId> &recommendations);

std::string format_record(const ExplanationRecord &rec);
void save_explanations(const std::vector<ExplanationRecord> &records,
                       const std::string &path);

} // namespace tmer
