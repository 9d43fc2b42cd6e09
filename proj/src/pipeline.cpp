#include "tmer/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "tmer/embed_init.hpp"
#include "tmer/evaluator.hpp"
#include "tmer/explain.hpp"
#include "tmer/path_encoder.hpp"
#include "tmer/rng.hpp"
#include "tmer/trainer.hpp"

namespace tmer {

namespace {

void require(const std::string &path, const std::string &stage) {
  if (!std::filesystem::exists(path))
    throw PipelineError("missing artifact " + path + "; run stage " + stage + " first");
}

// per-stage seed streams off the single master seed
enum StageSeed : uint64_t {
  kSeedWalks = 1,
  kSeedPaths = 2,
  kSeedTokens = 3,
  kSeedTrain = 4,
  kSeedEval = 5
};

struct LoadedStack {
  Hin hin;
  std::vector<UserSequence> seqs;
  EmbeddingTable node_emb;
  PairCorpus corpus;
  EmbeddingTable tokens;
};

LoadedStack load_through_tokens(const PipelineConfig &cfg) {
  require(cfg.hin_file(), "prepare");
  require(cfg.node_emb_bin(), "init-embed");
  require(cfg.corpus_file(), "sample-paths");
  require(cfg.token_emb_bin(), "encode-paths");
  LoadedStack st;
  st.hin = Hin::load(cfg.hin_file());
  st.seqs = load_sequences(st.hin, cfg.sequences_file());
  st.node_emb = EmbeddingTable::load_binary(st.hin, cfg.node_emb_bin());
  st.corpus = load_pair_corpus(st.hin, cfg.corpus_file(), cfg.k_paths);
  st.tokens = EmbeddingTable::load_binary(st.hin, cfg.token_emb_bin());
  return st;
}

} // namespace

std::string PipelineConfig::describe() const {
  std::ostringstream os;
  os << "dataset=" << dataset << " seed=" << seed << " dim=" << dim << " heads=" << heads
     << " k_paths=" << k_paths << " n_neg=" << n_neg << " lr=" << lr
     << " epochs=" << epochs << " ablation=" << ablation_to_string(ablation)
     << " loss=" << (paper_literal_loss ? "paper-literal" : "standard")
     << " workers=" << workers << " eval_negatives=" << eval_negatives;
  return os.str();
}

std::string stage_prepare(const PipelineConfig &cfg) {
  if (cfg.interactions.empty() || cfg.metadata.empty())
    throw PipelineError("prepare requires --interactions and --metadata");
  std::filesystem::create_directories(cfg.workdir);
  IngestOptions opt;
  opt.min_interactions = cfg.min_interactions;
  IngestResult res = ingest(cfg.interactions, cfg.metadata, opt);
  res.hin.save(cfg.hin_file());
  save_sequences(res.hin, res.sequences, cfg.sequences_file());
  std::ostringstream os;
  os << "prepare: users=" << res.hin.count(NodeType::User)
     << " items=" << res.hin.count(NodeType::Item)
     << " brands=" << res.hin.count(NodeType::Brand)
     << " categories=" << res.hin.count(NodeType::Category)
     << " edges=" << res.hin.num_edges() << " dropped_users=" << res.dropped_users;
  return os.str();
}

std::string stage_init_embed(const PipelineConfig &cfg) {
  require(cfg.hin_file(), "prepare");
  Hin hin = Hin::load(cfg.hin_file());
  WalkConfig wc;
  wc.walks_per_node = cfg.walks_per_node;
  wc.walk_length = cfg.walk_length;
  wc.window = cfg.sg_window;
  wc.negatives = cfg.sg_negatives;
  wc.epochs = cfg.sg_epochs;
  wc.seed = derive_seed(cfg.seed, kSeedWalks);
  auto walks = generate_walks(hin, wc, cfg.workers);
  EmbedInitResult res = train_node_embeddings(hin, walks, cfg.dim, wc);
  res.embeddings.save_text(hin, cfg.node_emb_file());
  res.embeddings.save_binary(hin, cfg.node_emb_bin());
  std::ostringstream os;
  os << "init-embed: walks=" << walks.size() << " embedded=" << res.embeddings.count_present()
     << " untrained=" << res.untrained.size();
  if (!res.epoch_loss.empty())
    os << " first_epoch_loss=" << res.epoch_loss.front()
       << " last_epoch_loss=" << res.epoch_loss.back();
  return os.str();
}

std::string stage_sample_paths(const PipelineConfig &cfg) {
  require(cfg.hin_file(), "prepare");
  require(cfg.node_emb_bin(), "init-embed");
  Hin hin = Hin::load(cfg.hin_file());
  auto seqs = load_sequences(hin, cfg.sequences_file());
  EmbeddingTable node_emb = EmbeddingTable::load_binary(hin, cfg.node_emb_bin());
  SimilaritySource sim(hin, node_emb);
  PairCorpus corpus =
      build_pair_corpus(hin, sim, seqs, default_user_item_schemas(),
                        default_item_item_schemas(), cfg.k_paths, cfg.workers);
  save_pair_corpus(hin, seqs, corpus, cfg.corpus_file());
  size_t instances = 0;
  for (const auto *m : {&corpus.user_item, &corpus.item_item})
    for (const auto &[k, set] : *m) instances += set.instances.size();
  std::ostringstream os;
  os << "sample-paths: user_item_pairs=" << corpus.user_item.size()
     << " item_item_pairs=" << corpus.item_item.size() << " instances=" << instances;
  return os.str();
}

std::string stage_encode_paths(const PipelineConfig &cfg) {
  require(cfg.hin_file(), "prepare");
  require(cfg.corpus_file(), "sample-paths");
  Hin hin = Hin::load(cfg.hin_file());
  PairCorpus corpus = load_pair_corpus(hin, cfg.corpus_file(), cfg.k_paths);
  PathTokenConfig pc;
  pc.dim = cfg.dim;
  pc.window = cfg.path_window;
  pc.epochs = cfg.path_epochs;
  pc.seed = derive_seed(cfg.seed, kSeedTokens);
  EmbeddingTable tokens = train_path_tokens(hin, corpus, pc);
  tokens.save_text(hin, cfg.token_emb_file());
  tokens.save_binary(hin, cfg.token_emb_bin());
  std::ostringstream os;
  os << "encode-paths: tokens=" << tokens.count_present();
  return os.str();
}

std::string stage_train(const PipelineConfig &cfg) {
  LoadedStack st = load_through_tokens(cfg);
  SimilaritySource sim(st.hin, st.node_emb, &st.tokens);
  PathProvider provider(st.hin, sim, default_user_item_schemas(),
                        default_item_item_schemas(), cfg.k_paths, &st.corpus, st.tokens);
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.lr = cfg.lr;
  tc.n_neg = cfg.n_neg;
  tc.mode = cfg.ablation;
  tc.positive_term = !cfg.paper_literal_loss;
  tc.seed = derive_seed(cfg.seed, kSeedTrain);
  tc.early_stop = cfg.early_stop;
  TrainResult res =
      train_model(st.hin, st.seqs, st.node_emb, provider, cfg.dim, cfg.heads, tc);
  save_checkpoint(res.params, cfg.checkpoint_file());
  std::ostringstream os;
  os << "train: epochs_run=" << res.epochs_run;
  if (!res.epoch_loss.empty())
    os << " first_loss=" << res.epoch_loss.front() << " last_loss=" << res.epoch_loss.back();
  os << " ablation=" << ablation_to_string(cfg.ablation);
  return os.str();
}

std::string stage_evaluate(const PipelineConfig &cfg) {
  LoadedStack st = load_through_tokens(cfg);
  require(cfg.checkpoint_file(), "train");
  ModelParams params = load_checkpoint(cfg.checkpoint_file());
  SimilaritySource sim(st.hin, st.node_emb, &st.tokens);
  PathProvider provider(st.hin, sim, default_user_item_schemas(),
                        default_item_item_schemas(), cfg.k_paths, &st.corpus, st.tokens);
  EvalConfig ec;
  ec.n_negatives = cfg.eval_negatives;
  ec.mode = cfg.ablation;
  ec.seed = derive_seed(cfg.seed, kSeedEval);
  ec.workers = cfg.workers;
  EvalResult res = evaluate(st.hin, st.seqs, st.node_emb, provider, params, ec);
  std::string report =
      metrics_report(cfg.dataset, cfg.seed, ablation_to_string(cfg.ablation), res);
  std::ofstream(cfg.metrics_file(), std::ios::binary) << report;
  std::ofstream ranks(cfg.ranks_file(), std::ios::binary);
  for (const auto &r : res.ranks)
    ranks << st.hin.key_of(r.user) << '\t' << st.hin.key_of(r.positive) << '\t' << r.rank
          << '\t' << r.n_candidates << '\n';
  return report;
}

std::string stage_explain(const PipelineConfig &cfg) {
  LoadedStack st = load_through_tokens(cfg);
  require(cfg.checkpoint_file(), "train");
  ModelParams params = load_checkpoint(cfg.checkpoint_file());
  SimilaritySource sim(st.hin, st.node_emb, &st.tokens);
  PathProvider provider(st.hin, sim, default_user_item_schemas(),
                        default_item_item_schemas(), cfg.k_paths, &st.corpus, st.tokens);

  // recommend top-k among the evaluation candidate pool, then explain each
  std::vector<ExplanationRecord> records;
  for (size_t ui = 0; ui < st.seqs.size(); ++ui) {
    const UserSequence &seq = st.seqs[ui];
    Rng dummy(0);
    SeqExample ex = build_example(st.hin, seq, st.node_emb, provider, {}, 0, dummy);
    SeqForward fw = forward_sequence(ex, params, cfg.ablation);
    NodeId last_item = ex.items.back();

    std::unordered_set<NodeId> interacted(ex.items.begin(), ex.items.end());
    std::vector<std::pair<double, NodeId>> scored;
    Rng rng(derive_seed(cfg.seed, 0xE0A10000ULL + ui));
    std::unordered_set<NodeId> chosen;
    int budget = cfg.eval_negatives;
    std::vector<NodeId> pool;
    for (NodeId v = 0; v < st.hin.num_nodes(); ++v)
      if (st.hin.type_of(v) == NodeType::Item && !interacted.count(v)) pool.push_back(v);
    while (static_cast<int>(chosen.size()) <
           std::min(budget, static_cast<int>(pool.size())))
      chosen.insert(pool[rng.uniform_int(pool.size())]);
    for (NodeId j : chosen)
      scored.emplace_back(-score_candidate(st.hin, st.node_emb, provider, params,
                                           cfg.ablation, ex.user_emb, last_item,
                                           fw.state.back(), j),
                          j);
    std::sort(scored.begin(), scored.end());
    std::vector<NodeId> recs;
    for (int k = 0; k < std::min(cfg.explain_top_k, static_cast<int>(scored.size())); ++k)
      recs.push_back(scored[k].second);
    auto batch = explain_topk(st.hin, provider, params, seq.user, last_item, recs);
    records.insert(records.end(), batch.begin(), batch.end());
  }
  save_explanations(records, cfg.explanations_file());
  std::ostringstream os;
  os << "explain: records=" << records.size();
  return os.str();
}

std::string run_all(const PipelineConfig &cfg) {
  std::ostringstream os;
  os << stage_prepare(cfg) << '\n';
  os << stage_init_embed(cfg) << '\n';
  os << stage_sample_paths(cfg) << '\n';
  os << stage_encode_paths(cfg) << '\n';
  os << stage_train(cfg) << '\n';
  os << stage_evaluate(cfg);
  os << stage_explain(cfg) << '\n';
  return os.str();
}

} // namespace tmer
