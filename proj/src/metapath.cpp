#include "tmer/metapath.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tmer {

namespace {

bool connectable(NodeType a, NodeType b) {
  auto pair_is = [&](NodeType x, NodeType y) {
    return (a == x && b == y) || (a == y && b == x);
  };
  return pair_is(NodeType::User, NodeType::Item) ||
         pair_is(NodeType::Item, NodeType::Brand) ||
         pair_is(NodeType::Item, NodeType::Category);
}

bool has_edge(const Hin &hin, NodeId u, NodeId v) {
  const auto &edges = hin.edges_of(u);
  auto it = std::lower_bound(edges.begin(), edges.end(), v,
                             [](const Edge &e, NodeId x) { return e.neighbor < x; });
  return it != edges.end() && it->neighbor == v;
}

} // namespace

MetaPathSchema MetaPathSchema::parse(const std::string &s) {
  if (s.size() < 3 || s.size() > 6)
    throw std::invalid_argument("meta-path schema length must be 3..6: " + s);
  MetaPathSchema schema;
  for (char c : s) schema.types.push_back(node_type_from_char(c));
  for (size_t i = 1; i < schema.types.size(); ++i)
    if (!connectable(schema.types[i - 1], schema.types[i]))
      throw std::invalid_argument("schema has non-connectable consecutive types: " + s);
  if (!schema.is_user_item() && !schema.is_item_item())
    throw std::invalid_argument("schema endpoints must be U...I or I...I: " + s);
  return schema;
}

std::string MetaPathSchema::str() const {
  std::string s;
  for (NodeType t : types) s += node_type_char(t);
  return s;
}

double PathInstance::rank_score() const {
  int hops = static_cast<int>(nodes.size()) - 1;
  if (hops <= 0) return score;
  return std::pow(std::max(score, 0.0), 1.0 / hops);
}

double hop_similarity(const Vec &a, const Vec &b) {
  if (a.size() != b.size())
    throw std::invalid_argument("hop_similarity: dimension mismatch");
  if (!all_finite(a) || !all_finite(b))
    throw std::invalid_argument("hop_similarity: non-finite input");
  double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

const Vec *SimilaritySource::find(NodeId v) const {
  if (primary_.has(v)) return &primary_.get(v);
  if (secondary_ && secondary_->has(v)) return &secondary_->get(v);
  return nullptr;
}

double SimilaritySource::hop_score(NodeId from, NodeId to) const {
  const Vec *a = find(from);
  const Vec *b = find(to);
  if (a && b && a->size() == b->size()) return (1.0 + hop_similarity(*a, *b)) / 2.0;
  double deg = hin_.degree(to);
  return deg / (deg + 1.0);
}

namespace {

struct Partial {
  std::vector<NodeId> nodes;
  double score = 1.0;
};

bool partial_less(const Partial &a, const Partial &b) {
  if (a.score != b.score) return a.score > b.score;
  return a.nodes < b.nodes; // deterministic tie-break
}

void trim_beam(std::vector<Partial> &beam, int width) {
  std::sort(beam.begin(), beam.end(), partial_less);
  if (static_cast<int>(beam.size()) > width) beam.resize(width);
}

// Expand one sub-path end by one hop toward nodes of the given type.
std::vector<Partial> expand(const Hin &hin, const SimilaritySource &sim,
                            const std::vector<Partial> &beam, NodeType next_type,
                            int width) {
  std::vector<Partial> out;
  for (const Partial &p : beam) {
    NodeId cur = p.nodes.back();
    for (NodeId nxt : hin.neighbors(cur, next_type)) {
      Partial q = p;
      q.nodes.push_back(nxt);
      q.score *= sim.hop_score(cur, nxt);
      out.push_back(std::move(q));
    }
  }
  trim_beam(out, width);
  return out;
}

} // namespace

PairPathSet sample_instances(const Hin &hin, const SimilaritySource &sim,
                             const MetaPathSchema &schema, NodeId start, NodeId end,
                             int k) {
  if (k < 1) throw std::invalid_argument("sample_instances: k must be >= 1");
  if (hin.type_of(start) != schema.types.front() ||
      hin.type_of(end) != schema.types.back())
    throw std::invalid_argument("sample_instances: endpoint types do not match schema " +
                                schema.str());

  const int len = schema.length();
  const int mid = (len - 1) / 2; // forward covers 0..mid, backward mid+1..len-1

  std::vector<Partial> fwd{{{start}, 1.0}};
  for (int pos = 1; pos <= mid; ++pos) fwd = expand(hin, sim, fwd, schema.types[pos], k);

  std::vector<Partial> bwd{{{end}, 1.0}}; // stored end-first
  for (int pos = len - 2; pos > mid; --pos) bwd = expand(hin, sim, bwd, schema.types[pos], k);

  PairPathSet result;
  result.from = start;
  result.to = end;

  std::vector<Partial> complete;
  for (const Partial &f : fwd)
    for (const Partial &b : bwd) {
      NodeId a = f.nodes.back();
      NodeId c = b.nodes.back();
      if (!has_edge(hin, a, c)) continue;
      Partial whole;
      whole.nodes = f.nodes;
      whole.nodes.insert(whole.nodes.end(), b.nodes.rbegin(), b.nodes.rend());
      whole.score = f.score * sim.hop_score(a, c) * b.score;
      complete.push_back(std::move(whole));
    }
  std::sort(complete.begin(), complete.end(), partial_less);
  std::string schema_str = schema.str();
  for (const Partial &p : complete) {
    bool dup = false;
    for (const auto &inst : result.instances)
      if (inst.nodes == p.nodes) {
        dup = true;
        break;
      }
    if (dup) continue;
    result.instances.push_back({schema_str, p.nodes, p.score});
    if (static_cast<int>(result.instances.size()) == k) break;
  }
  return result;
}

namespace {

bool instance_rank_less(const PathInstance &a, const PathInstance &b) {
  double ra = a.rank_score(), rb = b.rank_score();
  if (ra != rb) return ra > rb;
  if (a.schema != b.schema) return a.schema < b.schema;
  return a.nodes < b.nodes;
}

} // namespace

PairPathSet sample_pair(const Hin &hin, const SimilaritySource &sim,
                        const std::vector<MetaPathSchema> &schemas, NodeId start,
                        NodeId end, int k) {
  PairPathSet pooled;
  pooled.from = start;
  pooled.to = end;
  for (const auto &schema : schemas) {
    if (hin.type_of(start) != schema.types.front() ||
        hin.type_of(end) != schema.types.back())
      continue;
    PairPathSet s = sample_instances(hin, sim, schema, start, end, k);
    pooled.instances.insert(pooled.instances.end(), s.instances.begin(),
                            s.instances.end());
  }
  std::sort(pooled.instances.begin(), pooled.instances.end(), instance_rank_less);
  if (static_cast<int>(pooled.instances.size()) > k) pooled.instances.resize(k);
  return pooled;
}

const PairPathSet *PairCorpus::find_user_item(NodeId u, NodeId i) const {
  auto it = user_item.find(key(u, i));
  return it == user_item.end() ? nullptr : &it->second;
}

const PairPathSet *PairCorpus::find_item_item(NodeId a, NodeId b) const {
  auto it = item_item.find(key(a, b));
  return it == item_item.end() ? nullptr : &it->second;
}

PairCorpus build_pair_corpus(const Hin &hin, const SimilaritySource &sim,
                             const std::vector<UserSequence> &seqs,
                             const std::vector<MetaPathSchema> &ui_schemas,
                             const std::vector<MetaPathSchema> &ii_schemas, int k,
                             int workers) {
  PairCorpus corpus;
  corpus.k = k;

  std::vector<std::pair<NodeId, NodeId>> ui_pairs, ii_pairs;
  for (const auto &s : seqs) {
    auto items = s.bridge_train();
    if (items.empty()) continue;
    if (corpus.user_item.emplace(PairCorpus::key(s.user, items[0]), PairPathSet{}).second)
      ui_pairs.emplace_back(s.user, items[0]);
    for (size_t t = 1; t < items.size(); ++t)
      if (corpus.item_item.emplace(PairCorpus::key(items[t - 1], items[t]), PairPathSet{})
              .second)
        ii_pairs.emplace_back(items[t - 1], items[t]);
  }

  std::vector<PairPathSet> ui_out(ui_pairs.size()), ii_out(ii_pairs.size());
  auto run = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      if (i < ui_pairs.size())
        ui_out[i] = sample_pair(hin, sim, ui_schemas, ui_pairs[i].first,
                                ui_pairs[i].second, k);
      else {
        size_t j = i - ui_pairs.size();
        ii_out[j] =
            sample_pair(hin, sim, ii_schemas, ii_pairs[j].first, ii_pairs[j].second, k);
      }
    }
  };
  size_t total = ui_pairs.size() + ii_pairs.size();
  if (workers <= 1) {
    run(0, total);
  } else {
    std::vector<std::thread> pool;
    size_t chunk = (total + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
      size_t b = t * chunk, e = std::min(total, b + chunk);
      if (b >= e) break;
      pool.emplace_back(run, b, e);
    }
    for (auto &th : pool) th.join();
  }

  for (size_t i = 0; i < ui_pairs.size(); ++i)
    corpus.user_item[PairCorpus::key(ui_pairs[i].first, ui_pairs[i].second)] =
        std::move(ui_out[i]);
  for (size_t i = 0; i < ii_pairs.size(); ++i)
    corpus.item_item[PairCorpus::key(ii_pairs[i].first, ii_pairs[i].second)] =
        std::move(ii_out[i]);
  return corpus;
}

void save_pair_corpus(const Hin &hin, const std::vector<UserSequence> &seqs,
                      const PairCorpus &corpus, const std::string &path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw HinError("cannot open for write: " + path);
  f.precision(17);
  auto emit_set = [&](const std::string &user_key, const PairPathSet &set,
                      const char *empty_marker) {
    if (set.empty()) {
      // pair recorded with zero instances; model substitutes a zero context
      f << user_key << '\t' << empty_marker << '\t' << hin.key_of(set.from) << ','
        << hin.key_of(set.to) << "\t0\n";
      return;
    }
    for (const auto &inst : set.instances) {
      f << user_key << '\t' << inst.schema << '\t';
      for (size_t i = 0; i < inst.nodes.size(); ++i)
        f << (i ? "," : "") << hin.key_of(inst.nodes[i]);
      f << '\t' << inst.score << '\n';
    }
  };
  std::unordered_map<uint64_t, char> dumped_ii;
  for (const auto &s : seqs) {
    auto items = s.bridge_train();
    if (items.empty()) continue;
    const std::string &ukey = hin.key_of(s.user);
    if (const PairPathSet *set = corpus.find_user_item(s.user, items[0]))
      emit_set(ukey, *set, "-UI");
    for (size_t t = 1; t < items.size(); ++t) {
      uint64_t key = PairCorpus::key(items[t - 1], items[t]);
      if (!dumped_ii.emplace(key, 1).second) continue;
      if (const PairPathSet *set = corpus.find_item_item(items[t - 1], items[t]))
        emit_set(ukey, *set, "-II");
    }
  }
}

PairCorpus load_pair_corpus(const Hin &hin, const std::string &path, int k) {
  std::ifstream f(path);
  if (!f) throw HinError("cannot open: " + path);
  PairCorpus corpus;
  corpus.k = k;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string ukey, schema_str, nodes_str, score_str;
    if (!std::getline(ss, ukey, '\t') || !std::getline(ss, schema_str, '\t') ||
        !std::getline(ss, nodes_str, '\t') || !std::getline(ss, score_str))
      throw HinError("malformed path corpus line: " + line);

    std::vector<std::string> keys;
    size_t start = 0;
    while (true) {
      size_t pos = nodes_str.find(',', start);
      keys.push_back(pos == std::string::npos ? nodes_str.substr(start)
                                              : nodes_str.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }

    if (schema_str == "-UI" || schema_str == "-II") {
      bool ui = schema_str == "-UI";
      NodeId from = hin.lookup(keys.at(0), ui ? NodeType::User : NodeType::Item);
      NodeId to = hin.lookup(keys.at(1), NodeType::Item);
      if (from < 0 || to < 0) throw HinError("corpus references unknown node: " + line);
      PairPathSet set;
      set.from = from;
      set.to = to;
      (ui ? corpus.user_item : corpus.item_item)[PairCorpus::key(from, to)] = set;
      continue;
    }

    MetaPathSchema schema = MetaPathSchema::parse(schema_str);
    if (static_cast<int>(keys.size()) != schema.length())
      throw HinError("corpus node count does not match schema: " + line);
    PathInstance inst;
    inst.schema = schema_str;
    for (int p = 0; p < schema.length(); ++p) {
      NodeId v = hin.lookup(keys[p], schema.types[p]);
      if (v < 0) throw HinError("corpus references unknown node: " + keys[p]);
      inst.nodes.push_back(v);
    }
    inst.score = std::stod(score_str);
    auto &map = schema.is_user_item() ? corpus.user_item : corpus.item_item;
    auto &set = map[PairCorpus::key(inst.nodes.front(), inst.nodes.back())];
    set.from = inst.nodes.front();
    set.to = inst.nodes.back();
    bool dup = false;
    for (const auto &have : set.instances)
      if (have.nodes == inst.nodes && have.schema == inst.schema) {
        dup = true;
        break;
      }
    if (!dup) set.instances.push_back(std::move(inst));
  }
  for (auto *map : {&corpus.user_item, &corpus.item_item})
    for (auto &[key, set] : *map)
      std::sort(set.instances.begin(), set.instances.end(), instance_rank_less);
  return corpus;
}

std::vector<MetaPathSchema> default_user_item_schemas() {
  std::vector<MetaPathSchema> out;
  for (const char *s : {"UIBI", "UICI", "UIBICI", "UICIBI"})
    out.push_back(MetaPathSchema::parse(s));
  return out;
}

std::vector<MetaPathSchema> default_item_item_schemas() {
  std::vector<MetaPathSchema> out;
  for (const char *s : {"ICIBI", "IBICI", "ICICI", "IBIBI", "IUIUI", "ICIUI", "IBIUI"})
    out.push_back(MetaPathSchema::parse(s));
  return out;
}

} // namespace tmer
