#include "tmer/embedding.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace tmer {

namespace {
constexpr char kMagic[8] = {'T', 'M', 'E', 'R', 'E', 'M', 'B', '1'};
}

void EmbeddingTable::save_text(const Hin &hin, const std::string &path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw HinError("cannot open for write: " + path);
  f.precision(17);
  for (NodeId v = 0; v < size(); ++v) {
    if (!present_[v]) continue;
    f << node_type_char(hin.type_of(v)) << ':' << hin.key_of(v) << '\t';
    const Vec &row = rows_[v];
    for (int j = 0; j < dim_; ++j) f << (j ? " " : "") << row[j];
    f << '\n';
  }
}

void EmbeddingTable::save_binary(const Hin &hin, const std::string &path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw HinError("cannot open for write: " + path);
  f.write(kMagic, 8);
  int32_t d = dim_, count = count_present();
  f.write(reinterpret_cast<const char *>(&d), 4);
  f.write(reinterpret_cast<const char *>(&count), 4);
  for (NodeId v = 0; v < size(); ++v) {
    if (!present_[v]) continue;
    std::string key = std::string(1, node_type_char(hin.type_of(v))) + ":" + hin.key_of(v);
    uint32_t len = static_cast<uint32_t>(key.size());
    f.write(reinterpret_cast<const char *>(&len), 4);
    f.write(key.data(), len);
    f.write(reinterpret_cast<const char *>(rows_[v].data()), sizeof(double) * dim_);
  }
}

namespace {
NodeId resolve_typed_key(const Hin &hin, const std::string &typed_key) {
  if (typed_key.size() < 3 || typed_key[1] != ':')
    throw HinError("bad typed key in embedding file: " + typed_key);
  NodeType t = node_type_from_char(typed_key[0]);
  NodeId v = hin.lookup(typed_key.substr(2), t);
  if (v < 0) throw HinError("embedding file references unknown node: " + typed_key);
  return v;
}
} // namespace

EmbeddingTable EmbeddingTable::load_text(const Hin &hin, const std::string &path) {
  std::ifstream f(path);
  if (!f) throw HinError("cannot open: " + path);
  EmbeddingTable tab;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    size_t tab_pos = line.find('\t');
    if (tab_pos == std::string::npos) throw HinError("malformed embedding line");
    NodeId v = resolve_typed_key(hin, line.substr(0, tab_pos));
    std::istringstream ss(line.substr(tab_pos + 1));
    Vec row;
    double x;
    while (ss >> x) row.push_back(x);
    if (tab.dim_ == 0) {
      tab.dim_ = static_cast<int>(row.size());
      tab.rows_.resize(hin.num_nodes());
      tab.present_.assign(hin.num_nodes(), 0);
    }
    if (static_cast<int>(row.size()) != tab.dim_)
      throw HinError("inconsistent embedding dimension in " + path);
    tab.set(v, std::move(row));
  }
  return tab;
}

EmbeddingTable EmbeddingTable::load_binary(const Hin &hin, const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw HinError("cannot open: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0)
    throw HinError("bad embedding file magic: " + path);
  int32_t d = 0, count = 0;
  f.read(reinterpret_cast<char *>(&d), 4);
  f.read(reinterpret_cast<char *>(&count), 4);
  EmbeddingTable tab(hin.num_nodes(), d);
  for (int i = 0; i < count; ++i) {
    uint32_t len = 0;
    f.read(reinterpret_cast<char *>(&len), 4);
    std::string key(len, '\0');
    f.read(key.data(), len);
    Vec row(d);
    f.read(reinterpret_cast<char *>(row.data()), sizeof(double) * d);
    if (!f) throw HinError("truncated embedding file: " + path);
    tab.set(resolve_typed_key(hin, key), std::move(row));
  }
  return tab;
}

} // namespace tmer
