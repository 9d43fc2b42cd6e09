#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace tmer {

using NodeId = int32_t;

enum class NodeType : uint8_t { User = 0, Item = 1, Brand = 2, Category = 3 };

inline char node_type_char(NodeType t) {
  switch (t) {
    case NodeType::User: return 'U';
    case NodeType::Item: return 'I';
    case NodeType::Brand: return 'B';
    case NodeType::Category: return 'C';
  }
  return '?';
}

NodeType node_type_from_char(char c);

enum class RelKind : uint8_t { Buy = 0, IsBrandOf = 1, InCategory = 2 };

struct Relation {
  RelKind kind = RelKind::Buy;
  int64_t timestamp = 0; // only meaningful for Buy
};

struct Edge {
  NodeId neighbor;
  Relation rel;
};

class HinError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Typed multigraph over User/Item/Brand/Category nodes. Immutable once
// built; adjacency is symmetric and sorted by neighbor id.
class Hin {
public:
  NodeId add_node(const std::string &key, NodeType type);
  void add_edge(NodeId u, NodeId v, Relation rel);
  void finalize(); // sorts adjacency; call once after construction

  int num_nodes() const { return static_cast<int>(types_.size()); }
  NodeType type_of(NodeId v) const { return types_.at(v); }
  const std::string &key_of(NodeId v) const { return keys_.at(v); }
  // -1 when the key is unknown for that type
  NodeId lookup(const std::string &key, NodeType type) const;

  const std::vector<Edge> &edges_of(NodeId v) const;
  std::vector<NodeId> neighbors(NodeId v, NodeType type_filter) const;
  int degree(NodeId v) const { return static_cast<int>(edges_of(v).size()); }

  int count(NodeType t) const { return counts_[static_cast<int>(t)]; }
  int num_edges() const { return num_edges_; }

  void save(const std::string &path) const;
  static Hin load(const std::string &path);

private:
  void check_node(NodeId v) const;

  std::vector<NodeType> types_;
  std::vector<std::string> keys_;
  std::vector<std::vector<Edge>> adj_;
  // keys are only unique within a type (a brand and an item may share a raw key)
  std::unordered_map<std::string, NodeId> index_[4];
  int counts_[4] = {0, 0, 0, 0};
  int num_edges_ = 0;
  bool finalized_ = false;
};

// One user's chronological purchase history split into segments.
// bridge seeds sequential context, train items are the supervised
// positives, test items are ranking targets.
struct UserSequence {
  NodeId user = -1;
  std::vector<NodeId> bridge;
  std::vector<NodeId> train;
  std::vector<NodeId> test;

  std::vector<NodeId> bridge_train() const {
    std::vector<NodeId> out = bridge;
    out.insert(out.end(), train.begin(), train.end());
    return out;
  }
};

struct IngestOptions {
  // users with fewer interactions than this are dropped; must be >= 7
  // (2 bridge + 4 train + at least 1 test)
  int min_interactions = 12;
  int max_interactions = 12; // keep the latest N per user
};

struct IngestResult {
  Hin hin;
  std::vector<UserSequence> sequences;
  int dropped_users = 0;
  int duplicate_interactions = 0;
  int unknown_metadata_items = 0;
};

IngestResult ingest(const std::string &interactions_path,
                    const std::string &metadata_path,
                    const IngestOptions &opt = {});

void save_sequences(const Hin &hin, const std::vector<UserSequence> &seqs,
                    const std::string &path);
std::vector<UserSequence> load_sequences(const Hin &hin, const std::string &path);

} // namespace tmer
