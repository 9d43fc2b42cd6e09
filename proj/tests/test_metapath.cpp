#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "test_support.hpp"

using namespace tmer;

TEST_CASE("schema parsing validates shape") {
  CHECK(MetaPathSchema::parse("UIBI").str() == "UIBI");
  CHECK(MetaPathSchema::parse("IUIUI").hops() == 4);
  CHECK(MetaPathSchema::parse("IBI").is_item_item());
  CHECK(MetaPathSchema::parse("UICIBI").is_user_item());
  CHECK_THROWS(MetaPathSchema::parse("UI"));       // too short
  CHECK_THROWS(MetaPathSchema::parse("UIBICIU"));  // too long
  CHECK_THROWS(MetaPathSchema::parse("UBI"));      // U-B not connectable
  CHECK_THROWS(MetaPathSchema::parse("UIB"));      // endpoints not U..I / I..I
  CHECK_THROWS(MetaPathSchema::parse("XYZ"));
}

TEST_CASE("hop_similarity basics") {
  Vec v{1.0, 2.0, 3.0};
  CHECK(hop_similarity(v, v) == doctest::Approx(1.0));
  CHECK(hop_similarity({1, 0}, {0, 1}) == doctest::Approx(0.0));
  CHECK(hop_similarity({0, 0}, {1, 1}) == 0.0);
  CHECK_THROWS(hop_similarity({1, 0}, {1, 0, 0}));

  // arithmetic oracle on a fixture
  Vec a{0.3, -1.2, 0.5}, b{2.0, 0.1, -0.7};
  double num = 0.3 * 2.0 + -1.2 * 0.1 + 0.5 * -0.7;
  double na = std::sqrt(0.09 + 1.44 + 0.25), nb = std::sqrt(4.0 + 0.01 + 0.49);
  CHECK(hop_similarity(a, b) == doctest::Approx(num / (na * nb)).epsilon(1e-12));
}

TEST_CASE("unique IUI path is found with its hop-similarity product") {
  auto t = test::make_toy_hin();
  auto emb = test::random_embeddings(t.hin, 8, 5);
  SimilaritySource sim(t.hin, emb);
  // i2's only user is u1, whose other item is i1: unique path i2-u1-i1
  auto set = sample_instances(t.hin, sim, MetaPathSchema::parse("IUI"), t.i2, t.i1, 3);
  REQUIRE(set.instances.size() == 1);
  CHECK(set.instances[0].nodes == std::vector<NodeId>{t.i2, t.u1, t.i1});
  double expected = sim.hop_score(t.i2, t.u1) * sim.hop_score(t.u1, t.i1);
  CHECK(set.instances[0].score == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("disconnected endpoints give an empty set") {
  Hin h;
  NodeId i1 = h.add_node("i1", NodeType::Item);
  NodeId i2 = h.add_node("i2", NodeType::Item);
  NodeId u = h.add_node("u", NodeType::User);
  h.add_edge(u, i1, {RelKind::Buy, 0});
  h.finalize();
  auto emb = test::random_embeddings(h, 4, 1);
  SimilaritySource sim(h, emb);
  CHECK(sample_instances(h, sim, MetaPathSchema::parse("IUI"), i1, i2, 5).empty());
}

TEST_CASE("IBI top-3 on the toy fixture equals exhaustive enumeration") {
  auto t = test::make_toy_hin();
  auto emb = test::random_embeddings(t.hin, 8, 9);
  SimilaritySource sim(t.hin, emb);
  auto schema = MetaPathSchema::parse("IBI");
  auto sampled = sample_instances(t.hin, sim, schema, t.i1, t.i2, 3);
  auto oracle = test::enumerate_instances(t.hin, sim, schema, t.i1, t.i2);
  std::sort(oracle.begin(), oracle.end(),
            [](const PathInstance &a, const PathInstance &b) { return a.score > b.score; });
  REQUIRE(sampled.instances.size() == std::min<size_t>(3, oracle.size()));
  for (size_t i = 0; i < sampled.instances.size(); ++i) {
    CHECK(sampled.instances[i].nodes == oracle[i].nodes);
    CHECK(sampled.instances[i].score == doctest::Approx(oracle[i].score).epsilon(1e-12));
  }
}

TEST_CASE("sampled instances are always schema-conforming and graph-valid") {
  Hin h = test::make_random_hin(15, 40, 5, 4, 10, 77);
  auto emb = test::random_embeddings(h, 8, 21);
  SimilaritySource sim(h, emb);
  for (const char *ss : {"IUI", "IBI", "ICICI", "IUIBI", "UIBI", "UICIBI"}) {
    auto schema = MetaPathSchema::parse(ss);
    // try a handful of endpoint pairs
    std::vector<NodeId> starts, ends;
    for (NodeId v = 0; v < h.num_nodes(); ++v) {
      if (h.type_of(v) == schema.types.front()) starts.push_back(v);
      if (h.type_of(v) == schema.types.back()) ends.push_back(v);
    }
    for (int trial = 0; trial < 10; ++trial) {
      NodeId s = starts[trial % starts.size()];
      NodeId e = ends[(trial * 7) % ends.size()];
      auto set = sample_instances(h, sim, schema, s, e, 4);
      for (const auto &inst : set.instances) {
        REQUIRE(inst.nodes.size() == static_cast<size_t>(schema.length()));
        CHECK(inst.nodes.front() == s);
        CHECK(inst.nodes.back() == e);
        for (int p = 0; p < schema.length(); ++p)
          CHECK(h.type_of(inst.nodes[p]) == schema.types[p]);
        for (size_t p = 1; p < inst.nodes.size(); ++p) {
          auto nbrs = h.neighbors(inst.nodes[p - 1], h.type_of(inst.nodes[p]));
          CHECK(std::find(nbrs.begin(), nbrs.end(), inst.nodes[p]) != nbrs.end());
        }
      }
      // no duplicates
      for (size_t i = 0; i < set.instances.size(); ++i)
        for (size_t j = i + 1; j < set.instances.size(); ++j)
          CHECK(set.instances[i].nodes != set.instances[j].nodes);
    }
  }
}

TEST_CASE("sampler output is a subset of the exhaustive instance set") {
  Hin h = test::make_random_hin(10, 25, 4, 3, 8, 33);
  auto emb = test::random_embeddings(h, 8, 34);
  SimilaritySource sim(h, emb);
  auto schema = MetaPathSchema::parse("IBIBI");
  std::vector<NodeId> items;
  for (NodeId v = 0; v < h.num_nodes(); ++v)
    if (h.type_of(v) == NodeType::Item) items.push_back(v);
  for (int trial = 0; trial < 5; ++trial) {
    NodeId s = items[trial], e = items[items.size() - 1 - trial];
    auto sampled = sample_instances(h, sim, schema, s, e, 3);
    auto oracle = test::enumerate_instances(h, sim, schema, s, e);
    for (const auto &inst : sampled.instances) {
      bool in_oracle = false;
      for (const auto &o : oracle)
        if (o.nodes == inst.nodes) {
          in_oracle = true;
          CHECK(inst.score == doctest::Approx(o.score).epsilon(1e-12));
        }
      CHECK(in_oracle);
    }
  }
}

TEST_CASE("build_pair_corpus generates the documented pairs") {
  Hin h = test::make_random_hin(3, 30, 3, 2, 12, 55);
  auto emb = test::random_embeddings(h, 8, 56);
  SimilaritySource sim(h, emb);
  std::vector<UserSequence> seqs;
  for (NodeId v = 0; v < h.num_nodes(); ++v) {
    if (h.type_of(v) != NodeType::User) continue;
    auto its = h.neighbors(v, NodeType::Item);
    if (its.size() < 6) continue;
    UserSequence s;
    s.user = v;
    s.bridge = {its[0], its[1]};
    s.train = {its[2], its[3], its[4], its[5]};
    seqs.push_back(s);
  }
  REQUIRE(!seqs.empty());
  auto corpus = build_pair_corpus(h, sim, seqs, default_user_item_schemas(),
                                  default_item_item_schemas(), 5);
  for (const auto &s : seqs) {
    auto items = s.bridge_train();
    CHECK(corpus.find_user_item(s.user, items[0]) != nullptr);
    for (size_t t = 1; t < items.size(); ++t)
      CHECK(corpus.find_item_item(items[t - 1], items[t]) != nullptr);
  }
  // validator sweep: every recorded instance is graph-valid
  for (const auto *map : {&corpus.user_item, &corpus.item_item})
    for (const auto &[key, set] : *map)
      for (const auto &inst : set.instances) {
        auto schema = MetaPathSchema::parse(inst.schema);
        REQUIRE(inst.nodes.size() == static_cast<size_t>(schema.length()));
        for (int p = 0; p < schema.length(); ++p)
          CHECK(h.type_of(inst.nodes[p]) == schema.types[p]);
        CHECK(static_cast<int>(set.instances.size()) <= corpus.k);
      }
}

TEST_CASE("empty schema list maps every pair to the empty set") {
  auto t = test::make_toy_hin();
  auto emb = test::random_embeddings(t.hin, 4, 2);
  SimilaritySource sim(t.hin, emb);
  UserSequence s;
  s.user = t.u1;
  s.bridge = {t.i1, t.i2};
  s.train = {};
  auto corpus = build_pair_corpus(t.hin, sim, {s}, {}, {}, 5);
  const auto *ui = corpus.find_user_item(t.u1, t.i1);
  REQUIRE(ui != nullptr);
  CHECK(ui->empty());
  const auto *ii = corpus.find_item_item(t.i1, t.i2);
  REQUIRE(ii != nullptr);
  CHECK(ii->empty());
}

TEST_CASE("corpus determinism and dump round-trip") {
  Hin h = test::make_random_hin(4, 25, 3, 2, 10, 66);
  auto emb = test::random_embeddings(h, 8, 67);
  SimilaritySource sim(h, emb);
  std::vector<UserSequence> seqs;
  for (NodeId v = 0; v < h.num_nodes(); ++v) {
    if (h.type_of(v) != NodeType::User) continue;
    auto its = h.neighbors(v, NodeType::Item);
    if (its.size() < 4) continue;
    UserSequence s;
    s.user = v;
    s.bridge = {its[0], its[1]};
    s.train = {its[2], its[3]};
    seqs.push_back(s);
  }
  auto c1 = build_pair_corpus(h, sim, seqs, default_user_item_schemas(),
                              default_item_item_schemas(), 4);
  auto c2 = build_pair_corpus(h, sim, seqs, default_user_item_schemas(),
                              default_item_item_schemas(), 4, 3);
  REQUIRE(c1.item_item.size() == c2.item_item.size());
  for (const auto &[key, set] : c1.item_item) {
    const auto &other = c2.item_item.at(key);
    REQUIRE(set.instances.size() == other.instances.size());
    for (size_t i = 0; i < set.instances.size(); ++i) {
      CHECK(set.instances[i].nodes == other.instances[i].nodes);
      CHECK(set.instances[i].score == other.instances[i].score);
    }
  }

  std::string path = std::filesystem::temp_directory_path() / "tmer_corpus_test.tsv";
  save_pair_corpus(h, seqs, c1, path);
  auto loaded = load_pair_corpus(h, path, 4);
  std::filesystem::remove(path);
  REQUIRE(loaded.user_item.size() == c1.user_item.size());
  REQUIRE(loaded.item_item.size() == c1.item_item.size());
  for (const auto &[key, set] : c1.item_item) {
    const auto &other = loaded.item_item.at(key);
    REQUIRE(set.instances.size() == other.instances.size());
    for (size_t i = 0; i < set.instances.size(); ++i)
      CHECK(set.instances[i].nodes == other.instances[i].nodes);
  }
}
