#include "tmer/hin.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace tmer {

NodeType node_type_from_char(char c) {
  switch (c) {
    case 'U': return NodeType::User;
    case 'I': return NodeType::Item;
    case 'B': return NodeType::Brand;
    case 'C': return NodeType::Category;
  }
  throw HinError(std::string("unknown node type char: ") + c);
}

NodeId Hin::add_node(const std::string &key, NodeType type) {
  auto &idx = index_[static_cast<int>(type)];
  auto it = idx.find(key);
  if (it != idx.end()) return it->second;
  NodeId id = static_cast<NodeId>(types_.size());
  types_.push_back(type);
  keys_.push_back(key);
  adj_.emplace_back();
  idx.emplace(key, id);
  counts_[static_cast<int>(type)]++;
  return id;
}

void Hin::add_edge(NodeId u, NodeId v, Relation rel) {
  check_node(u);
  check_node(v);
  if (u == v) throw HinError("self-loop rejected: " + keys_[u]);
  auto endpoint_ok = [&](NodeType a, NodeType b) {
    switch (rel.kind) {
      case RelKind::Buy:
        return (a == NodeType::User && b == NodeType::Item) ||
               (a == NodeType::Item && b == NodeType::User);
      case RelKind::IsBrandOf:
        return (a == NodeType::Brand && b == NodeType::Item) ||
               (a == NodeType::Item && b == NodeType::Brand);
      case RelKind::InCategory:
        return (a == NodeType::Category && b == NodeType::Item) ||
               (a == NodeType::Item && b == NodeType::Category);
    }
    return false;
  };
  if (!endpoint_ok(types_[u], types_[v]))
    throw HinError("relation/endpoint type mismatch on edge " + keys_[u] + " - " + keys_[v]);
  adj_[u].push_back({v, rel});
  adj_[v].push_back({u, rel});
  num_edges_++;
}

void Hin::finalize() {
  auto less = [](const Edge &a, const Edge &b) {
    if (a.neighbor != b.neighbor) return a.neighbor < b.neighbor;
    if (a.rel.kind != b.rel.kind) return a.rel.kind < b.rel.kind;
    return a.rel.timestamp < b.rel.timestamp;
  };
  for (auto &lst : adj_) std::stable_sort(lst.begin(), lst.end(), less);
  finalized_ = true;
}

void Hin::check_node(NodeId v) const {
  if (v < 0 || v >= num_nodes()) throw HinError("unknown node id " + std::to_string(v));
}

NodeId Hin::lookup(const std::string &key, NodeType type) const {
  const auto &idx = index_[static_cast<int>(type)];
  auto it = idx.find(key);
  return it == idx.end() ? -1 : it->second;
}

const std::vector<Edge> &Hin::edges_of(NodeId v) const {
  check_node(v);
  return adj_[v];
}

std::vector<NodeId> Hin::neighbors(NodeId v, NodeType type_filter) const {
  check_node(v);
  std::vector<NodeId> out;
  for (const Edge &e : adj_[v])
    if (types_[e.neighbor] == type_filter)
      if (out.empty() || out.back() != e.neighbor) out.push_back(e.neighbor);
  return out;
}

void Hin::save(const std::string &path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw HinError("cannot open for write: " + path);
  f << "TMER-HIN v1\n";
  f << "nodes " << num_nodes() << "\n";
  for (NodeId v = 0; v < num_nodes(); ++v)
    f << v << '\t' << node_type_char(types_[v]) << '\t' << keys_[v] << '\n';
  f << "edges " << num_edges_ << "\n";
  // each undirected edge emitted once, from the smaller endpoint
  for (NodeId v = 0; v < num_nodes(); ++v)
    for (const Edge &e : adj_[v])
      if (v < e.neighbor)
        f << v << '\t' << e.neighbor << '\t' << static_cast<int>(e.rel.kind) << '\t'
          << e.rel.timestamp << '\n';
  if (!f) throw HinError("write failed: " + path);
}

Hin Hin::load(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw HinError("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "TMER-HIN v1")
    throw HinError("bad HIN file header: " + path);
  std::string word;
  int n = 0, m = 0;
  f >> word >> n;
  if (word != "nodes") throw HinError("bad HIN node table: " + path);
  std::getline(f, line);
  Hin h;
  for (int i = 0; i < n; ++i) {
    std::getline(f, line);
    std::istringstream ss(line);
    int id;
    char tc;
    std::string key;
    ss >> id >> tc;
    ss.get(); // tab
    std::getline(ss, key);
    NodeId got = h.add_node(key, node_type_from_char(tc));
    if (got != id) throw HinError("non-dense node ids in " + path);
  }
  f >> word >> m;
  if (word != "edges") throw HinError("bad HIN edge table: " + path);
  for (int i = 0; i < m; ++i) {
    int u, v, kind;
    int64_t ts;
    f >> u >> v >> kind >> ts;
    h.add_edge(u, v, {static_cast<RelKind>(kind), ts});
  }
  h.finalize();
  return h;
}

namespace {

struct RawInteraction {
  std::string user, item;
  int64_t ts;
  int line_no; // preserves input order for stable timestamp ties
};

std::vector<std::string> split_tabs(const std::string &line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

} // namespace

IngestResult ingest(const std::string &interactions_path,
                    const std::string &metadata_path, const IngestOptions &opt) {
  if (opt.min_interactions < 7)
    throw HinError("min_interactions must be >= 7 (2 bridge + 4 train + 1 test)");

  std::ifstream fi(interactions_path);
  if (!fi) throw HinError("cannot open: " + interactions_path);

  IngestResult res;
  std::vector<RawInteraction> raw;
  std::string line;
  int line_no = 0;
  while (std::getline(fi, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 3 || cols[0].empty() || cols[1].empty())
      throw HinError(interactions_path + ":" + std::to_string(line_no) + ": malformed row");
    int64_t ts;
    try {
      ts = std::stoll(cols[2]);
    } catch (const std::exception &) {
      throw HinError(interactions_path + ":" + std::to_string(line_no) + ": bad timestamp");
    }
    raw.push_back({cols[0], cols[1], ts, line_no});
  }

  // group per user, preserving file order within each user
  std::unordered_map<std::string, std::vector<size_t>> per_user;
  std::vector<std::string> user_order;
  for (size_t i = 0; i < raw.size(); ++i) {
    auto [it, inserted] = per_user.try_emplace(raw[i].user);
    if (inserted) user_order.push_back(raw[i].user);
    it->second.push_back(i);
  }

  Hin &h = res.hin;
  struct Kept {
    std::string user;
    std::vector<size_t> rows; // ascending by (ts, file order)
  };
  std::vector<Kept> kept;
  for (const auto &ukey : user_order) {
    auto rows = per_user[ukey];
    std::stable_sort(rows.begin(), rows.end(), [&](size_t a, size_t b) {
      return raw[a].ts < raw[b].ts;
    });
    // dedup exact (user,item,timestamp) repeats, first occurrence wins
    std::vector<size_t> dedup;
    for (size_t r : rows) {
      bool dup = false;
      for (size_t d : dedup)
        if (raw[d].item == raw[r].item && raw[d].ts == raw[r].ts) {
          dup = true;
          break;
        }
      if (dup)
        res.duplicate_interactions++;
      else
        dedup.push_back(r);
    }
    if (static_cast<int>(dedup.size()) < opt.min_interactions) {
      res.dropped_users++;
      continue;
    }
    if (static_cast<int>(dedup.size()) > opt.max_interactions)
      dedup.erase(dedup.begin(), dedup.end() - opt.max_interactions);
    kept.push_back({ukey, std::move(dedup)});
  }

  for (const auto &k : kept) {
    NodeId u = h.add_node(k.user, NodeType::User);
    UserSequence seq;
    seq.user = u;
    int pos = 0;
    for (size_t r : k.rows) {
      NodeId i = h.add_node(raw[r].item, NodeType::Item);
      h.add_edge(u, i, {RelKind::Buy, raw[r].ts});
      if (pos < 2)
        seq.bridge.push_back(i);
      else if (pos < 6)
        seq.train.push_back(i);
      else
        seq.test.push_back(i);
      ++pos;
    }
    res.sequences.push_back(std::move(seq));
  }

  std::ifstream fm(metadata_path);
  if (!fm) throw HinError("cannot open: " + metadata_path);
  line_no = 0;
  while (std::getline(fm, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 3 || cols[0].empty())
      throw HinError(metadata_path + ":" + std::to_string(line_no) + ": malformed row");
    NodeId item = h.lookup(cols[0], NodeType::Item);
    if (item < 0) {
      res.unknown_metadata_items++;
      continue;
    }
    if (!cols[1].empty()) {
      NodeId b = h.add_node(cols[1], NodeType::Brand);
      if (h.neighbors(item, NodeType::Brand).empty())
        h.add_edge(b, item, {RelKind::IsBrandOf, 0});
    }
    if (!cols[2].empty()) {
      NodeId c = h.add_node(cols[2], NodeType::Category);
      if (h.neighbors(item, NodeType::Category).empty())
        h.add_edge(c, item, {RelKind::InCategory, 0});
    }
  }

  h.finalize();
  return res;
}

void save_sequences(const Hin &hin, const std::vector<UserSequence> &seqs,
                    const std::string &path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw HinError("cannot open for write: " + path);
  auto emit = [&](const std::vector<NodeId> &v) {
    for (size_t i = 0; i < v.size(); ++i) f << (i ? "," : "") << hin.key_of(v[i]);
  };
  for (const auto &s : seqs) {
    f << hin.key_of(s.user) << '\t';
    emit(s.bridge);
    f << '\t';
    emit(s.train);
    f << '\t';
    emit(s.test);
    f << '\n';
  }
}

std::vector<UserSequence> load_sequences(const Hin &hin, const std::string &path) {
  std::ifstream f(path);
  if (!f) throw HinError("cannot open: " + path);
  std::vector<UserSequence> out;
  std::string line;
  auto parse_items = [&](const std::string &field) {
    std::vector<NodeId> v;
    if (field.empty()) return v;
    size_t start = 0;
    while (true) {
      size_t pos = field.find(',', start);
      std::string key =
          pos == std::string::npos ? field.substr(start) : field.substr(start, pos - start);
      NodeId id = hin.lookup(key, NodeType::Item);
      if (id < 0) throw HinError("sequence references unknown item: " + key);
      v.push_back(id);
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return v;
  };
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    size_t t1 = line.find('\t');
    size_t t2 = line.find('\t', t1 + 1);
    size_t t3 = line.find('\t', t2 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos || t3 == std::string::npos)
      throw HinError("malformed sequence line in " + path);
    UserSequence s;
    s.user = hin.lookup(line.substr(0, t1), NodeType::User);
    if (s.user < 0) throw HinError("sequence references unknown user");
    s.bridge = parse_items(line.substr(t1 + 1, t2 - t1 - 1));
    s.train = parse_items(line.substr(t2 + 1, t3 - t2 - 1));
    s.test = parse_items(line.substr(t3 + 1));
    out.push_back(std::move(s));
  }
  return out;
}

} // namespace tmer
