// Pipeline driver: prepare | init-embed | sample-paths | encode-paths |
// train | evaluate | explain | run-all. Stages communicate through files
// under --workdir; a single --seed fans out deterministically per stage.
#include <CLI11.hpp>

#include <iostream>

#include "tmer/pipeline.hpp"

int main(int argc, char **argv) {
  CLI::App app{"TMER: temporal meta-path guided explainable recommendation"};
  app.require_subcommand(1);

  tmer::PipelineConfig cfg;
  std::string ablation = "full";
  std::string loss = "standard";

  // config file precedence: CLI flag > config file > built-in default
  app.set_config("--config", "", "flat key=value config file; keys mirror flags");
  app.add_option("--workdir", cfg.workdir, "artifact directory")->capture_default_str();
  app.add_option("--interactions", cfg.interactions, "tsv: user item unix_timestamp");
  app.add_option("--metadata", cfg.metadata, "tsv: item brand category");
  app.add_option("--dataset", cfg.dataset, "dataset label for reports")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  app.add_option("--dim", cfg.dim, "embedding dimension")->capture_default_str();
  app.add_option("--heads", cfg.heads, "attention head count")->capture_default_str();
  app.add_option("--k-paths", cfg.k_paths, "instances kept per pair")
      ->capture_default_str();
  app.add_option("--n-neg", cfg.n_neg, "training negatives per positive")
      ->capture_default_str();
  app.add_option("--lr", cfg.lr, "learning rate")->capture_default_str();
  app.add_option("--epochs", cfg.epochs, "training epochs")->capture_default_str();
  app.add_option("--ablation", ablation, "full | RUI | RII")->capture_default_str();
  app.add_option("--loss", loss, "standard | paper-literal")->capture_default_str();
  app.add_option("--workers", cfg.workers, "worker threads for parallel stages")
      ->capture_default_str();
  app.add_option("--eval-negatives", cfg.eval_negatives, "negatives per test instance")
      ->capture_default_str();
  app.add_option("--min-interactions", cfg.min_interactions,
                 "drop users with fewer interactions (>= 7)")
      ->capture_default_str();
  app.add_option("--walks-per-node", cfg.walks_per_node)->capture_default_str();
  app.add_option("--walk-length", cfg.walk_length)->capture_default_str();
  app.add_option("--sg-window", cfg.sg_window)->capture_default_str();
  app.add_option("--sg-epochs", cfg.sg_epochs)->capture_default_str();
  app.add_option("--path-epochs", cfg.path_epochs)->capture_default_str();
  app.add_flag("--early-stop", cfg.early_stop, "hold out last train item, stop on val HR@10");
  app.add_option("--explain-top-k", cfg.explain_top_k)->capture_default_str();

  auto *c_prepare = app.add_subcommand("prepare", "ingest raw files into a HIN + splits");
  auto *c_embed = app.add_subcommand("init-embed", "random walks + skip-gram node vectors");
  auto *c_paths = app.add_subcommand("sample-paths", "sample meta-path instances per pair");
  auto *c_encode = app.add_subcommand("encode-paths", "train path-token vectors");
  auto *c_train = app.add_subcommand("train", "train the scoring model");
  auto *c_eval = app.add_subcommand("evaluate", "HR@K / NDCG@K under sampled negatives");
  auto *c_explain = app.add_subcommand("explain", "attention-weighted reasoning paths");
  auto *c_all = app.add_subcommand("run-all", "chain every stage");

  // global flags may appear after the subcommand name
  for (auto *sc : {c_prepare, c_embed, c_paths, c_encode, c_train, c_eval, c_explain, c_all})
    sc->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.ablation = tmer::ablation_from_string(ablation);
    if (loss == "paper-literal")
      cfg.paper_literal_loss = true;
    else if (loss != "standard")
      throw std::invalid_argument("unknown --loss: " + loss);

    std::cerr << "config: " << cfg.describe() << "\n";
    std::string out;
    if (c_prepare->parsed()) out = tmer::stage_prepare(cfg);
    if (c_embed->parsed()) out = tmer::stage_init_embed(cfg);
    if (c_paths->parsed()) out = tmer::stage_sample_paths(cfg);
    if (c_encode->parsed()) out = tmer::stage_encode_paths(cfg);
    if (c_train->parsed()) out = tmer::stage_train(cfg);
    if (c_eval->parsed()) out = tmer::stage_evaluate(cfg);
    if (c_explain->parsed()) out = tmer::stage_explain(cfg);
    if (c_all->parsed()) out = tmer::run_all(cfg);
    std::cout << out << std::endl;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
