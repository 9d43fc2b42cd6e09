#include "tmer/explain.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace tmer {

ExplanationRecord explain_pair(const Hin &hin, PathProvider &paths,
                               const ModelParams &params, NodeId user, NodeId from_item,
                               NodeId to_item) {
  ExplanationRecord rec;
  rec.user_key = hin.key_of(user);
  rec.from_item_key = hin.key_of(from_item);
  rec.to_item_key = hin.key_of(to_item);

  const PairPathSet &set = paths.item_item_set(from_item, to_item);
  if (set.empty()) {
    rec.no_evidence = true;
    return rec;
  }
  const Mat &encoded = paths.item_item(from_item, to_item);
  AttentionOut out = self_attend(encoded, params.item_item_att);
  for (size_t i = 0; i < set.instances.size(); ++i) {
    ExplainedPath ep;
    ep.schema = set.instances[i].schema;
    for (NodeId v : set.instances[i].nodes) ep.node_keys.push_back(hin.key_of(v));
    ep.weight = out.weights[i];
    rec.paths.push_back(std::move(ep));
  }
  std::stable_sort(rec.paths.begin(), rec.paths.end(),
                   [](const ExplainedPath &a, const ExplainedPath &b) {
                     return a.weight > b.weight;
                   });
  return rec;
}

std::vector<ExplanationRecord> explain_topk(const Hin &hin, PathProvider &paths,
                                            const ModelParams &params, NodeId user,
                                            NodeId last_item,
                                            const std::vector<NodeId> &recommendations) {
  std::vector<ExplanationRecord> out;
  out.reserve(recommendations.size());
  for (NodeId rec_item : recommendations)
    out.push_back(explain_pair(hin, paths, params, user, last_item, rec_item));
  return out;
}

std::string format_record(const ExplanationRecord &rec) {
  std::ostringstream os;
  os << rec.user_key << '\t' << rec.from_item_key << "->" << rec.to_item_key << '\t';
  if (rec.no_evidence) {
    os << "no-evidence";
  } else {
    for (size_t i = 0; i < rec.paths.size(); ++i) {
      if (i) os << ' ';
      const auto &p = rec.paths[i];
      os << p.schema << ':';
      for (size_t j = 0; j < p.node_keys.size(); ++j)
        os << (j ? "," : "") << p.node_keys[j];
      char buf[32];
      std::snprintf(buf, sizeof(buf), "=%.4f", p.weight);
      os << buf;
    }
  }
  return os.str();
}

void save_explanations(const std::vector<ExplanationRecord> &records,
                       const std::string &path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  for (const auto &rec : records) f << format_record(rec) << '\n';
}

} // namespace tmer
