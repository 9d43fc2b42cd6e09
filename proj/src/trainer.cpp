#include "tmer/trainer.hpp"

#include <algorithm>
#include <iostream>
#include <unordered_set>

#include "tmer/rng.hpp"

namespace tmer {

namespace {

struct StepCache {
  AttentionCache att;
  bool att_used = false;
  GateCache gate;
};

struct FullCache {
  AttentionCache user_att;
  bool user_att_used = false;
  FirstItemCache first;
  std::vector<StepCache> steps; // index t >= 1
};

SeqForward forward_with_cache(const SeqExample &ex, const ModelParams &params,
                              Ablation mode, FullCache *cache) {
  const int d = params.dim;
  const int T = static_cast<int>(ex.items.size());
  SeqForward fw;
  fw.user_context.assign(d, 0.0);
  if (cache) cache->steps.resize(T);

  if (mode != Ablation::RUI && ex.user_paths.rows > 0) {
    AttentionOut out =
        self_attend(ex.user_paths, params.user_item_att, cache ? &cache->user_att : nullptr);
    fw.user_context = std::move(out.context);
    fw.user_weights = std::move(out.weights);
    if (cache) cache->user_att_used = true;
  }

  fw.contexts.assign(T, Vec(d, 0.0));
  fw.h1.assign(T, Vec());
  fw.h2.assign(T, Vec());
  fw.state.assign(T, Vec());
  fw.state[0] = init_first_item(ex.item_embs[0], fw.user_context, params.gates,
                                cache ? &cache->first : nullptr);
  for (int t = 1; t < T; ++t) {
    if (mode != Ablation::RII && ex.step_paths[t].rows > 0) {
      AttentionOut out = self_attend(ex.step_paths[t], params.item_item_att,
                                     cache ? &cache->steps[t].att : nullptr);
      fw.contexts[t] = std::move(out.context);
      if (cache) cache->steps[t].att_used = true;
    }
    UpdateOut uo = update_item(fw.state[t - 1], ex.item_embs[t], fw.contexts[t],
                               params.gates, cache ? &cache->steps[t].gate : nullptr);
    fw.h1[t] = std::move(uo.h1);
    fw.h2[t] = uo.h2;
    fw.state[t] = std::move(uo.h2);
  }
  return fw;
}

void split3(const Vec &x, int d, Vec &a, Vec &b, Vec &c) {
  a.assign(x.begin(), x.begin() + d);
  b.assign(x.begin() + d, x.begin() + 2 * d);
  c.assign(x.begin() + 2 * d, x.end());
}

} // namespace

SeqForward forward_sequence(const SeqExample &ex, const ModelParams &params,
                            Ablation mode) {
  SeqForward fw = forward_with_cache(ex, params, mode, nullptr);
  for (size_t p = 0; p < ex.positives.size(); ++p) {
    int pos = ex.positives[p];
    double r = pos == 0
                   ? score_first(ex.user_emb, fw.user_context, fw.state[0], params.mlp)
                   : score(ex.user_emb, fw.h1[pos], fw.h2[pos], params.mlp);
    fw.positive_scores.push_back(r);
  }
  return fw;
}

LossGrads loss_and_grads(const std::vector<SeqExample> &batch, const ModelParams &params,
                         Ablation mode, bool include_positive_term) {
  const int d = params.dim;
  LossGrads out;
  out.grads = zero_like(params);
  double loss_sum = 0.0;

  for (const SeqExample &ex : batch) {
    const int T = static_cast<int>(ex.items.size());
    FullCache cache;
    SeqForward fw = forward_with_cache(ex, params, mode, &cache);

    std::vector<Vec> dstate(T, Vec(d, 0.0));
    std::vector<Vec> dh1_direct(T, Vec(d, 0.0));
    Vec dc_user(d, 0.0);

    for (size_t p = 0; p < ex.positives.size(); ++p) {
      const int pos = ex.positives[p];
      out.n_positives++;

      if (pos == 0) {
        Vec input = ex.user_emb;
        input.insert(input.end(), fw.user_context.begin(), fw.user_context.end());
        input.insert(input.end(), fw.state[0].begin(), fw.state[0].end());
        MlpCache mc;
        double r = sigmoid(mlp_logit(input, params.mlp, &mc));
        if (include_positive_term) {
          loss_sum += -std::log(std::max(r, 1e-12));
          Vec dinput = mlp_backward(r - 1.0, mc, params.mlp, out.grads.mlp);
          Vec du, dcu, dh0;
          split3(dinput, d, du, dcu, dh0);
          axpy(1.0, dcu, dc_user);
          axpy(1.0, dh0, dstate[0]);
        }
      } else {
        Vec input = ex.user_emb;
        input.insert(input.end(), fw.h1[pos].begin(), fw.h1[pos].end());
        input.insert(input.end(), fw.h2[pos].begin(), fw.h2[pos].end());
        MlpCache mc;
        double r = sigmoid(mlp_logit(input, params.mlp, &mc));
        if (include_positive_term) {
          loss_sum += -std::log(std::max(r, 1e-12));
          Vec dinput = mlp_backward(r - 1.0, mc, params.mlp, out.grads.mlp);
          Vec du, dd1, dd2;
          split3(dinput, d, du, dd1, dd2);
          axpy(1.0, dd1, dh1_direct[pos]);
          axpy(1.0, dd2, dstate[pos]);
        }
      }

      // negatives are leaves: they read the chain state but never extend it
      for (const NegSample &neg : ex.negatives[p]) {
        if (pos == 0) {
          Vec c_uj(d, 0.0);
          AttentionCache ac;
          bool used = false;
          if (mode != Ablation::RUI && neg.paths.rows > 0) {
            c_uj = self_attend(neg.paths, params.user_item_att, &ac).context;
            used = true;
          }
          FirstItemCache fc;
          Vec h_j = init_first_item(neg.item_emb, c_uj, params.gates, &fc);
          Vec input = ex.user_emb;
          input.insert(input.end(), c_uj.begin(), c_uj.end());
          input.insert(input.end(), h_j.begin(), h_j.end());
          MlpCache mc;
          double r = sigmoid(mlp_logit(input, params.mlp, &mc));
          loss_sum += -std::log(std::max(1.0 - r, 1e-12));
          Vec dinput = mlp_backward(r, mc, params.mlp, out.grads.mlp);
          Vec du, dcu, dhj;
          split3(dinput, d, du, dcu, dhj);
          Vec dcu2;
          init_first_item_backward(dhj, fc, params.gates, out.grads.gates, dcu2);
          axpy(1.0, dcu2, dcu);
          if (used)
            self_attend_backward(dcu, ac, params.user_item_att, out.grads.user_item_att);
        } else {
          Vec c_j(d, 0.0);
          AttentionCache ac;
          bool used = false;
          if (mode != Ablation::RII && neg.paths.rows > 0) {
            c_j = self_attend(neg.paths, params.item_item_att, &ac).context;
            used = true;
          }
          GateCache gc;
          UpdateOut uo = update_item(fw.state[pos - 1], neg.item_emb, c_j, params.gates, &gc);
          Vec input = ex.user_emb;
          input.insert(input.end(), uo.h1.begin(), uo.h1.end());
          input.insert(input.end(), uo.h2.begin(), uo.h2.end());
          MlpCache mc;
          double r = sigmoid(mlp_logit(input, params.mlp, &mc));
          loss_sum += -std::log(std::max(1.0 - r, 1e-12));
          Vec dinput = mlp_backward(r, mc, params.mlp, out.grads.mlp);
          Vec du, dh1j, dh2j;
          split3(dinput, d, du, dh1j, dh2j);
          Vec dh_prev, dc;
          update_item_backward(dh1j, dh2j, gc, params.gates, out.grads.gates, dh_prev, dc);
          axpy(1.0, dh_prev, dstate[pos - 1]);
          if (used)
            self_attend_backward(dc, ac, params.item_item_att, out.grads.item_item_att);
        }
      }
    }

    // back through the h_prev chain
    for (int t = T - 1; t >= 1; --t) {
      Vec dh_prev, dc;
      update_item_backward(dh1_direct[t], dstate[t], cache.steps[t].gate, params.gates,
                           out.grads.gates, dh_prev, dc);
      axpy(1.0, dh_prev, dstate[t - 1]);
      if (cache.steps[t].att_used)
        self_attend_backward(dc, cache.steps[t].att, params.item_item_att,
                             out.grads.item_item_att);
    }
    Vec dcu_gate;
    init_first_item_backward(dstate[0], cache.first, params.gates, out.grads.gates,
                             dcu_gate);
    axpy(1.0, dcu_gate, dc_user);
    if (cache.user_att_used)
      self_attend_backward(dc_user, cache.user_att, params.user_item_att,
                           out.grads.user_item_att);
  }

  if (out.n_positives > 0) {
    double inv = 1.0 / out.n_positives;
    out.loss = loss_sum * inv;
    for_each_tensor(out.grads, [&](std::vector<double> &t, const std::string &) {
      for (double &x : t) x *= inv;
    });
  }
  return out;
}

SeqExample build_example(const Hin &hin, const UserSequence &seq,
                         const EmbeddingTable &node_emb, PathProvider &paths,
                         const std::vector<int> &positives, int n_neg, Rng &rng) {
  SeqExample ex;
  ex.user = seq.user;
  ex.user_emb = node_emb.get(seq.user);
  ex.items = seq.bridge_train();
  if (ex.items.empty()) throw std::invalid_argument("build_example: empty sequence");
  ex.user_paths = paths.user_item(seq.user, ex.items[0]);
  ex.item_embs.resize(ex.items.size());
  ex.step_paths.resize(ex.items.size());
  for (size_t t = 0; t < ex.items.size(); ++t) {
    ex.item_embs[t] = node_emb.get(ex.items[t]);
    if (t > 0) ex.step_paths[t] = paths.item_item(ex.items[t - 1], ex.items[t]);
  }

  std::unordered_set<NodeId> interacted(seq.bridge.begin(), seq.bridge.end());
  interacted.insert(seq.train.begin(), seq.train.end());
  interacted.insert(seq.test.begin(), seq.test.end());
  std::vector<NodeId> candidates;
  for (NodeId v = 0; v < hin.num_nodes(); ++v)
    if (hin.type_of(v) == NodeType::Item && !interacted.count(v)) candidates.push_back(v);

  ex.positives = positives;
  ex.negatives.resize(positives.size());
  if (candidates.empty()) {
    std::cerr << "warning: user " << hin.key_of(seq.user)
              << " has interacted with every item; skipping negative draw\n";
    return ex;
  }
  for (size_t p = 0; p < positives.size(); ++p) {
    for (int j = 0; j < n_neg; ++j) {
      NodeId neg = candidates[rng.uniform_int(candidates.size())];
      NegSample ns;
      ns.item = neg;
      ns.item_emb = node_emb.get(neg);
      ns.paths = positives[p] == 0 ? paths.user_item(seq.user, neg)
                                   : paths.item_item(ex.items[positives[p] - 1], neg);
      ex.negatives[p].push_back(std::move(ns));
    }
  }
  return ex;
}

namespace {

std::vector<std::vector<double> *> tensor_list(ModelParams &p) {
  std::vector<std::vector<double> *> out;
  for_each_tensor(p, [&](std::vector<double> &t, const std::string &) { out.push_back(&t); });
  return out;
}

} // namespace

void adam_step(ModelParams &params, ModelParams &grads, AdamState &st) {
  st.t++;
  auto ps = tensor_list(params), gs = tensor_list(grads), ms = tensor_list(st.m),
       vs = tensor_list(st.v);
  double bc1 = 1.0 - std::pow(st.cfg.beta1, static_cast<double>(st.t));
  double bc2 = 1.0 - std::pow(st.cfg.beta2, static_cast<double>(st.t));
  for (size_t k = 0; k < ps.size(); ++k) {
    auto &p = *ps[k];
    auto &g = *gs[k];
    auto &m = *ms[k];
    auto &v = *vs[k];
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = st.cfg.beta1 * m[i] + (1.0 - st.cfg.beta1) * g[i];
      v[i] = st.cfg.beta2 * v[i] + (1.0 - st.cfg.beta2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      p[i] -= st.cfg.lr * mhat / (std::sqrt(vhat) + st.cfg.eps);
    }
  }
}

namespace {

// HR@10 on the held-out last train item; used only for early stopping.
double validation_hr10(const Hin &hin, const std::vector<UserSequence> &seqs,
                       const EmbeddingTable &node_emb, PathProvider &paths,
                       const ModelParams &params, const TrainConfig &cfg) {
  int hits = 0, total = 0;
  for (size_t ui = 0; ui < seqs.size(); ++ui) {
    const UserSequence &seq = seqs[ui];
    if (seq.train.empty()) continue;
    Rng rng(derive_seed(cfg.seed, 0x5A1D0000ULL + ui));
    SeqExample ex = build_example(hin, seq, node_emb, paths, {}, 0, rng);
    SeqForward fw = forward_sequence(ex, params, cfg.mode);
    const int T = static_cast<int>(ex.items.size());
    if (T < 2) continue;
    NodeId positive = ex.items[T - 1];
    const Vec &h_prev = fw.state[T - 2];

    auto score_candidate = [&](NodeId j) {
      Vec c(params.dim, 0.0);
      const Mat &pm = paths.item_item(ex.items[T - 2], j);
      if (cfg.mode != Ablation::RII && pm.rows > 0)
        c = self_attend(pm, params.item_item_att).context;
      UpdateOut uo = update_item(h_prev, node_emb.get(j), c, params.gates);
      return score(ex.user_emb, uo.h1, uo.h2, params.mlp);
    };

    std::unordered_set<NodeId> interacted(seq.bridge.begin(), seq.bridge.end());
    interacted.insert(seq.train.begin(), seq.train.end());
    interacted.insert(seq.test.begin(), seq.test.end());
    std::vector<NodeId> pool;
    for (NodeId v = 0; v < hin.num_nodes(); ++v)
      if (hin.type_of(v) == NodeType::Item && !interacted.count(v)) pool.push_back(v);
    double ps = score_candidate(positive);
    int greater_eq = 0;
    int n = std::min<int>(cfg.val_negatives, static_cast<int>(pool.size()));
    for (int k = 0; k < n; ++k) {
      double s = score_candidate(pool[rng.uniform_int(pool.size())]);
      if (s >= ps) greater_eq++;
    }
    if (greater_eq + 1 <= 10) hits++;
    total++;
  }
  return total ? static_cast<double>(hits) / total : 0.0;
}

} // namespace

TrainResult train_model(const Hin &hin, const std::vector<UserSequence> &seqs,
                        const EmbeddingTable &node_emb, PathProvider &paths,
                        int dim, int heads, const TrainConfig &cfg) {
  TrainResult res;
  res.params = init_params(dim, heads, derive_seed(cfg.seed, 0x1A17));
  AdamState st(res.params, {cfg.lr});

  ModelParams best = res.params;
  double best_val = -1.0;
  int since_best = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double sum = 0.0;
    int cnt = 0;
    for (size_t ui = 0; ui < seqs.size(); ++ui) {
      const UserSequence &seq = seqs[ui];
      std::vector<int> positives;
      int first_train = static_cast<int>(seq.bridge.size());
      int n_train = static_cast<int>(seq.train.size());
      if (cfg.early_stop && n_train > 1) n_train -= 1; // hold out last train item
      for (int t = 0; t < n_train; ++t) positives.push_back(first_train + t);
      if (positives.empty()) continue;

      Rng rng(derive_seed(cfg.seed,
                          0x7A000000ULL + static_cast<uint64_t>(epoch) * 1000003ULL + ui));
      SeqExample ex = build_example(hin, seq, node_emb, paths, positives, cfg.n_neg, rng);
      LossGrads lg = loss_and_grads({ex}, res.params, cfg.mode, cfg.positive_term);
      adam_step(res.params, lg.grads, st);
      sum += lg.loss * lg.n_positives;
      cnt += lg.n_positives;
    }
    res.epoch_loss.push_back(cnt ? sum / cnt : 0.0);
    res.epochs_run = epoch + 1;
    if (cfg.verbose)
      std::cerr << "epoch " << epoch << " loss " << res.epoch_loss.back() << "\n";

    if (cfg.early_stop) {
      double hr = validation_hr10(hin, seqs, node_emb, paths, res.params, cfg);
      if (cfg.verbose) std::cerr << "  val HR@10 " << hr << "\n";
      if (hr > best_val) {
        best_val = hr;
        best = res.params;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        break;
      }
    }
  }
  if (cfg.early_stop) res.params = std::move(best);
  return res;
}

} // namespace tmer
