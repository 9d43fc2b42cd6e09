#pragma once

#include <string>
#include <vector>

#include "tmer/hin.hpp"
#include "tmer/linalg.hpp"

namespace tmer {

// Dense node -> vector table indexed by NodeId; not every node has a row
// (walk embeddings only cover users/items, path-token embeddings only cover
// nodes seen in the corpus).
class EmbeddingTable {
public:
  EmbeddingTable() = default;
  EmbeddingTable(int num_nodes, int dim)
      : dim_(dim), rows_(num_nodes), present_(num_nodes, 0) {}

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(rows_.size()); }
  bool has(NodeId v) const { return v >= 0 && v < size() && present_[v]; }
  const Vec &get(NodeId v) const { return rows_[v]; }
  void set(NodeId v, Vec emb) {
    rows_[v] = std::move(emb);
    present_[v] = 1;
  }
  int count_present() const {
    int n = 0;
    for (char c : present_) n += c;
    return n;
  }

  // text: node_key<TAB>v1 v2 ... vd
  void save_text(const Hin &hin, const std::string &path) const;
  // binary: magic, dim, count, then (key, values) records
  void save_binary(const Hin &hin, const std::string &path) const;
  static EmbeddingTable load_text(const Hin &hin, const std::string &path);
  static EmbeddingTable load_binary(const Hin &hin, const std::string &path);

private:
  int dim_ = 0;
  std::vector<Vec> rows_;
  std::vector<char> present_;
};

} // namespace tmer
