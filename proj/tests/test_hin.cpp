#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "test_support.hpp"

using namespace tmer;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("tmer_hin_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<uintptr_t>(this)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string &name) const { return (path / name).string(); }
};

void write_file(const std::string &path, const std::string &content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
}

std::string read_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

} // namespace

TEST_CASE("neighbors filters by type in ascending id order") {
  auto t = test::make_toy_hin();
  CHECK(t.hin.neighbors(t.i1, NodeType::Brand) == std::vector<NodeId>{t.b1});
  CHECK(t.hin.neighbors(t.i1, NodeType::User) == std::vector<NodeId>{t.u1, t.u2});
  CHECK(t.hin.neighbors(t.i2, NodeType::Category).empty());
  CHECK_THROWS_AS(t.hin.neighbors(99, NodeType::User), HinError);
}

TEST_CASE("toy adjacency matches hand-built edge list") {
  auto t = test::make_toy_hin();
  // brute-force: every expected undirected edge present both ways, no extras
  std::vector<std::tuple<NodeId, NodeId, RelKind>> expected = {
      {t.u1, t.i1, RelKind::Buy},       {t.u1, t.i2, RelKind::Buy},
      {t.u2, t.i1, RelKind::Buy},       {t.b1, t.i1, RelKind::IsBrandOf},
      {t.b1, t.i2, RelKind::IsBrandOf}, {t.c1, t.i1, RelKind::InCategory}};
  int count = 0;
  for (NodeId v = 0; v < t.hin.num_nodes(); ++v)
    for (const Edge &e : t.hin.edges_of(v)) {
      count++;
      bool found = false;
      for (auto [a, b, r] : expected)
        if (((a == v && b == e.neighbor) || (b == v && a == e.neighbor)) &&
            r == e.rel.kind)
          found = true;
      CHECK(found);
    }
  CHECK(count == 2 * static_cast<int>(expected.size()));
}

TEST_CASE("type discipline rejects bad edges and self-loops") {
  auto t = test::make_toy_hin();
  Hin h;
  NodeId u = h.add_node("u", NodeType::User);
  NodeId b = h.add_node("b", NodeType::Brand);
  CHECK_THROWS_AS(h.add_edge(u, b, {RelKind::Buy, 0}), HinError);
  CHECK_THROWS_AS(h.add_edge(u, u, {RelKind::Buy, 0}), HinError);
}

TEST_CASE("ingest splits twelve interactions into 2/4/6") {
  TempDir dir;
  std::string inter;
  for (int t = 1; t <= 12; ++t)
    inter += "alice\titem" + std::to_string(t) + "\t" + std::to_string(t) + "\n";
  write_file(dir.file("i.tsv"), inter);
  write_file(dir.file("m.tsv"), "item1\tbrandA\tcatA\n");

  auto res = ingest(dir.file("i.tsv"), dir.file("m.tsv"));
  REQUIRE(res.sequences.size() == 1);
  const auto &s = res.sequences[0];
  CHECK(s.bridge.size() == 2);
  CHECK(s.train.size() == 4);
  CHECK(s.test.size() == 6);
  CHECK(res.hin.key_of(s.bridge[0]) == "item1");
  CHECK(res.hin.key_of(s.bridge[1]) == "item2");
  CHECK(res.hin.key_of(s.train[0]) == "item3");
  CHECK(res.hin.key_of(s.train[3]) == "item6");
  CHECK(res.hin.key_of(s.test[0]) == "item7");
  CHECK(res.hin.key_of(s.test[5]) == "item12");
}

TEST_CASE("ingest drops short users, keeps latest twelve, dedups") {
  TempDir dir;
  std::string inter;
  // bob has 15 interactions; only the latest 12 should remain
  for (int t = 1; t <= 15; ++t)
    inter += "bob\titem" + std::to_string(t) + "\t" + std::to_string(t * 10) + "\n";
  // carol has too few
  for (int t = 1; t <= 5; ++t)
    inter += "carol\titem" + std::to_string(t) + "\t" + std::to_string(t) + "\n";
  // duplicate row for bob
  inter += "bob\titem15\t150\n";
  write_file(dir.file("i.tsv"), inter);
  write_file(dir.file("m.tsv"), "");

  auto res = ingest(dir.file("i.tsv"), dir.file("m.tsv"));
  REQUIRE(res.sequences.size() == 1);
  CHECK(res.dropped_users == 1);
  CHECK(res.duplicate_interactions == 1);
  const auto &s = res.sequences[0];
  CHECK(res.hin.key_of(s.bridge[0]) == "item4");
  CHECK(s.bridge.size() + s.train.size() + s.test.size() == 12);
}

TEST_CASE("equal timestamps keep input-file order") {
  TempDir dir;
  std::string inter;
  for (int t = 1; t <= 12; ++t)
    inter += "dave\titem" + std::to_string(t) + "\t100\n"; // all equal
  write_file(dir.file("i.tsv"), inter);
  write_file(dir.file("m.tsv"), "");
  auto res = ingest(dir.file("i.tsv"), dir.file("m.tsv"));
  REQUIRE(res.sequences.size() == 1);
  CHECK(res.hin.key_of(res.sequences[0].bridge[0]) == "item1");
  CHECK(res.hin.key_of(res.sequences[0].test[5]) == "item12");
}

TEST_CASE("malformed rows report the line number") {
  TempDir dir;
  write_file(dir.file("i.tsv"), "ok\titem\t5\nbadrow-without-tabs\n");
  write_file(dir.file("m.tsv"), "");
  try {
    ingest(dir.file("i.tsv"), dir.file("m.tsv"));
    FAIL("expected throw");
  } catch (const HinError &e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("min_interactions=7 keeps a 7-interaction user") {
  TempDir dir;
  std::string inter;
  for (int t = 1; t <= 7; ++t)
    inter += "erin\titem" + std::to_string(t) + "\t" + std::to_string(t) + "\n";
  write_file(dir.file("i.tsv"), inter);
  write_file(dir.file("m.tsv"), "");
  IngestOptions opt;
  opt.min_interactions = 7;
  auto res = ingest(dir.file("i.tsv"), dir.file("m.tsv"), opt);
  REQUIRE(res.sequences.size() == 1);
  CHECK(res.sequences[0].bridge.size() == 2);
  CHECK(res.sequences[0].train.size() == 4);
  CHECK(res.sequences[0].test.size() == 1);
}

TEST_CASE("ingestion is deterministic: same files, byte-identical dump") {
  TempDir dir;
  std::string inter;
  for (int u = 0; u < 5; ++u)
    for (int t = 1; t <= 12; ++t)
      inter += "u" + std::to_string(u) + "\titem" + std::to_string((u * 7 + t * 3) % 20) +
               "\t" + std::to_string(t) + "\n";
  write_file(dir.file("i.tsv"), inter);
  std::string meta;
  for (int i = 0; i < 20; ++i)
    meta += "item" + std::to_string(i) + "\tb" + std::to_string(i % 3) + "\tc" +
            std::to_string(i % 2) + "\n";
  write_file(dir.file("m.tsv"), meta);

  auto r1 = ingest(dir.file("i.tsv"), dir.file("m.tsv"));
  auto r2 = ingest(dir.file("i.tsv"), dir.file("m.tsv"));
  r1.hin.save(dir.file("h1.txt"));
  r2.hin.save(dir.file("h2.txt"));
  CHECK(read_file(dir.file("h1.txt")) == read_file(dir.file("h2.txt")));

  // round-trip
  Hin loaded = Hin::load(dir.file("h1.txt"));
  loaded.save(dir.file("h3.txt"));
  CHECK(read_file(dir.file("h1.txt")) == read_file(dir.file("h3.txt")));
}

TEST_CASE("adjacency symmetry holds after ingest") {
  Hin h = test::make_random_hin(10, 30, 4, 3, 8, 42);
  for (NodeId v = 0; v < h.num_nodes(); ++v)
    for (const Edge &e : h.edges_of(v)) {
      bool back = false;
      for (const Edge &r : h.edges_of(e.neighbor))
        if (r.neighbor == v && r.rel.kind == e.rel.kind &&
            r.rel.timestamp == e.rel.timestamp)
          back = true;
      CHECK(back);
    }
}

TEST_CASE("sequences round-trip through the tsv dump") {
  Hin h = test::make_random_hin(4, 20, 3, 2, 12, 7);
  std::vector<UserSequence> seqs;
  for (NodeId v = 0; v < h.num_nodes(); ++v) {
    if (h.type_of(v) != NodeType::User) continue;
    auto items = h.neighbors(v, NodeType::Item);
    if (items.size() < 7) continue;
    UserSequence s;
    s.user = v;
    s.bridge = {items[0], items[1]};
    s.train = {items[2], items[3], items[4], items[5]};
    s.test = {items[6]};
    seqs.push_back(s);
  }
  REQUIRE(!seqs.empty());
  TempDir dir;
  save_sequences(h, seqs, dir.file("seqs.tsv"));
  auto loaded = load_sequences(h, dir.file("seqs.tsv"));
  REQUIRE(loaded.size() == seqs.size());
  for (size_t i = 0; i < seqs.size(); ++i) {
    CHECK(loaded[i].user == seqs[i].user);
    CHECK(loaded[i].bridge == seqs[i].bridge);
    CHECK(loaded[i].train == seqs[i].train);
    CHECK(loaded[i].test == seqs[i].test);
  }
}
