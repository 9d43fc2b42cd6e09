#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tmer/linalg.hpp"

namespace tmer {

enum class Ablation { Full, RUI, RII };

Ablation ablation_from_string(const std::string &s);
std::string ablation_to_string(Ablation a);

// Multi-head self-attention over path rows. Per head: d x (d/heads)
// projections; one shared d x d output projection.
struct AttentionParams {
  int heads = 0;
  std::vector<Mat> wq, wk, wv;
  Mat wo;
};

// Gated item-representation updates. w_cur is shared between the
// second-layer update and the first-item update; each has its own bias.
struct GateParams {
  Mat w_prev, w_path1; // first layer, gate on h_{i-1}
  Mat w_cur, w_path2;  // second layer, gate on h_i
  Mat w_path_user;     // first-item update, path from the user
  Vec b1, b2, b_user;
};

// Tower MLP: 3d -> floor(3d/2) -> floor(3d/4) -> 1, ReLU hidden, sigmoid out.
struct MlpParams {
  std::vector<Mat> w;
  std::vector<Vec> b;
};

struct ModelParams {
  int dim = 0;
  int heads = 0;
  AttentionParams user_item_att;
  AttentionParams item_item_att;
  GateParams gates;
  MlpParams mlp;
};

ModelParams init_params(int dim, int heads, uint64_t seed);
ModelParams zero_like(const ModelParams &p);

// Visits every trainable tensor in a fixed declared order.
template <typename F> void for_each_tensor(ModelParams &p, F &&f) {
  for (int h = 0; h < p.user_item_att.heads; ++h) {
    f(p.user_item_att.wq[h].data, "ui_att.wq." + std::to_string(h));
    f(p.user_item_att.wk[h].data, "ui_att.wk." + std::to_string(h));
    f(p.user_item_att.wv[h].data, "ui_att.wv." + std::to_string(h));
  }
  f(p.user_item_att.wo.data, "ui_att.wo");
  for (int h = 0; h < p.item_item_att.heads; ++h) {
    f(p.item_item_att.wq[h].data, "ii_att.wq." + std::to_string(h));
    f(p.item_item_att.wk[h].data, "ii_att.wk." + std::to_string(h));
    f(p.item_item_att.wv[h].data, "ii_att.wv." + std::to_string(h));
  }
  f(p.item_item_att.wo.data, "ii_att.wo");
  f(p.gates.w_prev.data, "gates.w_prev");
  f(p.gates.w_path1.data, "gates.w_path1");
  f(p.gates.w_cur.data, "gates.w_cur");
  f(p.gates.w_path2.data, "gates.w_path2");
  f(p.gates.w_path_user.data, "gates.w_path_user");
  f(p.gates.b1, "gates.b1");
  f(p.gates.b2, "gates.b2");
  f(p.gates.b_user, "gates.b_user");
  for (size_t l = 0; l < p.mlp.w.size(); ++l) {
    f(p.mlp.w[l].data, "mlp.w" + std::to_string(l));
    f(p.mlp.b[l], "mlp.b" + std::to_string(l));
  }
}

// --- self-attention ---

struct AttentionCache {
  Mat input; // n x d
  std::vector<Mat> q, k, v, attn;
  Mat concat;
};

struct AttentionOut {
  Vec context; // d, mean over output rows; zero vector when n = 0
  Vec weights; // n, per-row mass averaged over heads and queries; sums to 1
};

AttentionOut self_attend(const Mat &paths, const AttentionParams &p,
                         AttentionCache *cache = nullptr);
void self_attend_backward(const Vec &dcontext, const AttentionCache &cache,
                          const AttentionParams &p, AttentionParams &grad);

// --- gated updates ---

struct GateCache {
  Vec h_prev, h_cur, h_path;
  Vec pre1, pre2; // pre-activation of each ReLU
};

struct UpdateOut {
  Vec h1, h2;
};

// h1 = ReLU(w_prev h_prev + w_path1 h_path + b1) * h_prev
// h2 = ReLU(w_cur  h_cur  + w_path2 h_path + b2) * h_cur
UpdateOut update_item(const Vec &h_prev, const Vec &h_cur, const Vec &h_path,
                      const GateParams &g, GateCache *cache = nullptr);
// accumulates into grad; returns gradients wrt h_prev and h_path
void update_item_backward(const Vec &dh1, const Vec &dh2, const GateCache &cache,
                          const GateParams &g, GateParams &grad, Vec &dh_prev,
                          Vec &dh_path);

struct FirstItemCache {
  Vec h_item, h_path;
  Vec pre;
};

// h = ReLU(w_cur h_item + w_path_user h_path + b_user) * h_item
Vec init_first_item(const Vec &h_item, const Vec &h_path_user, const GateParams &g,
                    FirstItemCache *cache = nullptr);
void init_first_item_backward(const Vec &dh, const FirstItemCache &cache,
                              const GateParams &g, GateParams &grad, Vec &dh_path);

// --- rating MLP ---

struct MlpCache {
  Vec input;
  std::vector<Vec> pre; // pre-activation per layer
};

// returns the pre-sigmoid logit; rating = sigmoid(logit)
double mlp_logit(const Vec &input, const MlpParams &mlp, MlpCache *cache = nullptr);
// dlogit is dL/d(logit); returns gradient wrt the input vector
Vec mlp_backward(double dlogit, const MlpCache &cache, const MlpParams &mlp,
                 MlpParams &grad);

double sigmoid(double x);

// rating in (0,1) for a non-first item: sigmoid(MLP([h_u; h1; h2]))
double score(const Vec &h_u, const Vec &h1, const Vec &h2, const MlpParams &mlp);
// rating for the first item: sigmoid(MLP([h_u; h_user_path; h_first]))
double score_first(const Vec &h_u, const Vec &h_user_path, const Vec &h_first,
                   const MlpParams &mlp);

// versioned binary checkpoint, little-endian 64-bit floats
void save_checkpoint(const ModelParams &p, const std::string &path);
ModelParams load_checkpoint(const std::string &path);

} // namespace tmer
