#include "tmer/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "tmer/rng.hpp"

namespace tmer {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Ablation ablation_from_string(const std::string &s) {
  if (s == "full") return Ablation::Full;
  if (s == "RUI" || s == "rui") return Ablation::RUI;
  if (s == "RII" || s == "rii") return Ablation::RII;
  throw std::invalid_argument("unknown ablation mode: " + s);
}

std::string ablation_to_string(Ablation a) {
  switch (a) {
    case Ablation::Full: return "full";
    case Ablation::RUI: return "RUI";
    case Ablation::RII: return "RII";
  }
  return "?";
}

namespace {

Mat glorot(int rows, int cols, Rng &rng) {
  Mat m(rows, cols);
  double bound = std::sqrt(6.0 / (rows + cols));
  for (double &x : m.data) x = rng.uniform(-bound, bound);
  return m;
}

AttentionParams init_attention(int dim, int heads, Rng &rng) {
  if (heads <= 0 || dim % heads != 0)
    throw std::invalid_argument("dim must be divisible by head count");
  AttentionParams p;
  p.heads = heads;
  int dh = dim / heads;
  for (int h = 0; h < heads; ++h) {
    p.wq.push_back(glorot(dim, dh, rng));
    p.wk.push_back(glorot(dim, dh, rng));
    p.wv.push_back(glorot(dim, dh, rng));
  }
  p.wo = glorot(dim, dim, rng);
  return p;
}

std::vector<int> mlp_sizes(int dim) {
  return {3 * dim, 3 * dim / 2, 3 * dim / 4, 1};
}

} // namespace

ModelParams init_params(int dim, int heads, uint64_t seed) {
  Rng rng(seed);
  ModelParams p;
  p.dim = dim;
  p.heads = heads;
  p.user_item_att = init_attention(dim, heads, rng);
  p.item_item_att = init_attention(dim, heads, rng);
  p.gates.w_prev = glorot(dim, dim, rng);
  p.gates.w_path1 = glorot(dim, dim, rng);
  p.gates.w_cur = glorot(dim, dim, rng);
  p.gates.w_path2 = glorot(dim, dim, rng);
  p.gates.w_path_user = glorot(dim, dim, rng);
  p.gates.b1.assign(dim, 0.0);
  p.gates.b2.assign(dim, 0.0);
  p.gates.b_user.assign(dim, 0.0);
  auto sizes = mlp_sizes(dim);
  for (size_t l = 1; l < sizes.size(); ++l) {
    p.mlp.w.push_back(glorot(sizes[l], sizes[l - 1], rng));
    p.mlp.b.emplace_back(sizes[l], 0.0);
  }
  return p;
}

ModelParams zero_like(const ModelParams &p) {
  ModelParams z = p;
  for_each_tensor(z, [](std::vector<double> &t, const std::string &) {
    std::fill(t.begin(), t.end(), 0.0);
  });
  return z;
}

AttentionOut self_attend(const Mat &paths, const AttentionParams &p,
                         AttentionCache *cache) {
  const int d = p.wo.rows;
  const int n = paths.rows;
  if (n > 0 && paths.cols != d)
    throw std::invalid_argument("self_attend: input width does not match params");
  if (!all_finite(paths)) throw std::invalid_argument("self_attend: non-finite input");

  AttentionOut out;
  out.context.assign(d, 0.0);
  if (n == 0) return out;

  const int dh = d / p.heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(d));

  Mat concat(n, d);
  out.weights.assign(n, 0.0);
  std::vector<Mat> qs, ks, vs, as;
  for (int h = 0; h < p.heads; ++h) {
    Mat q = matmul(paths, p.wq[h]);
    Mat k = matmul(paths, p.wk[h]);
    Mat v = matmul(paths, p.wv[h]);
    Mat a = matmul_bt(q, k); // n x n scores
    for (int r = 0; r < n; ++r) {
      double mx = -1e300;
      for (int c = 0; c < n; ++c) {
        a(r, c) *= inv_scale;
        mx = std::max(mx, a(r, c));
      }
      double sum = 0.0;
      for (int c = 0; c < n; ++c) {
        a(r, c) = std::exp(a(r, c) - mx);
        sum += a(r, c);
      }
      for (int c = 0; c < n; ++c) {
        a(r, c) /= sum;
        out.weights[c] += a(r, c);
      }
    }
    Mat hv = matmul(a, v); // n x dh
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < dh; ++c) concat(r, h * dh + c) = hv(r, c);
    if (cache) {
      qs.push_back(std::move(q));
      ks.push_back(std::move(k));
      vs.push_back(std::move(v));
      as.push_back(std::move(a));
    }
  }
  for (double &w : out.weights) w /= static_cast<double>(p.heads) * n;

  Mat o = matmul(concat, p.wo);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) out.context[c] += o(r, c) / n;

  if (cache) {
    cache->input = paths;
    cache->q = std::move(qs);
    cache->k = std::move(ks);
    cache->v = std::move(vs);
    cache->attn = std::move(as);
    cache->concat = std::move(concat);
  }
  return out;
}

void self_attend_backward(const Vec &dcontext, const AttentionCache &cache,
                          const AttentionParams &p, AttentionParams &grad) {
  const int n = cache.input.rows;
  if (n == 0) return;
  const int d = p.wo.rows;
  const int dh = d / p.heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(d));

  // context = rowmean(concat * wo)
  Mat dO(n, d);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) dO(r, c) = dcontext[c] / n;

  Mat dWo = matmul_at(cache.concat, dO);
  for (size_t i = 0; i < dWo.data.size(); ++i) grad.wo.data[i] += dWo.data[i];
  Mat dConcat = matmul_bt(dO, p.wo); // n x d

  for (int h = 0; h < p.heads; ++h) {
    Mat dH(n, dh);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < dh; ++c) dH(r, c) = dConcat(r, h * dh + c);

    const Mat &a = cache.attn[h];
    Mat dA = matmul_bt(dH, cache.v[h]);      // n x n
    Mat dV = matmul_at(a, dH);               // n x dh
    // softmax row backward
    Mat dS(n, n);
    for (int r = 0; r < n; ++r) {
      double row_dot = 0.0;
      for (int c = 0; c < n; ++c) row_dot += dA(r, c) * a(r, c);
      for (int c = 0; c < n; ++c) dS(r, c) = (dA(r, c) - row_dot) * a(r, c) * inv_scale;
    }
    Mat dQ = matmul(dS, cache.k[h]);    // n x dh
    Mat dK = matmul_at(dS, cache.q[h]); // n x dh

    Mat dWq = matmul_at(cache.input, dQ);
    Mat dWk = matmul_at(cache.input, dK);
    Mat dWv = matmul_at(cache.input, dV);
    for (size_t i = 0; i < dWq.data.size(); ++i) grad.wq[h].data[i] += dWq.data[i];
    for (size_t i = 0; i < dWk.data.size(); ++i) grad.wk[h].data[i] += dWk.data[i];
    for (size_t i = 0; i < dWv.data.size(); ++i) grad.wv[h].data[i] += dWv.data[i];
  }
}

UpdateOut update_item(const Vec &h_prev, const Vec &h_cur, const Vec &h_path,
                      const GateParams &g, GateCache *cache) {
  const size_t d = h_prev.size();
  if (h_cur.size() != d || h_path.size() != d)
    throw std::invalid_argument("update_item: dimension mismatch");

  Vec pre1 = matvec(g.w_prev, h_prev);
  axpy(1.0, matvec(g.w_path1, h_path), pre1);
  axpy(1.0, g.b1, pre1);
  Vec pre2 = matvec(g.w_cur, h_cur);
  axpy(1.0, matvec(g.w_path2, h_path), pre2);
  axpy(1.0, g.b2, pre2);

  UpdateOut out;
  out.h1.resize(d);
  out.h2.resize(d);
  for (size_t j = 0; j < d; ++j) {
    out.h1[j] = std::max(pre1[j], 0.0) * h_prev[j];
    out.h2[j] = std::max(pre2[j], 0.0) * h_cur[j];
  }
  if (cache) {
    cache->h_prev = h_prev;
    cache->h_cur = h_cur;
    cache->h_path = h_path;
    cache->pre1 = std::move(pre1);
    cache->pre2 = std::move(pre2);
  }
  return out;
}

void update_item_backward(const Vec &dh1, const Vec &dh2, const GateCache &cache,
                          const GateParams &g, GateParams &grad, Vec &dh_prev,
                          Vec &dh_path) {
  const size_t d = cache.h_prev.size();
  Vec da1(d), da2(d);
  dh_prev.assign(d, 0.0);
  dh_path.assign(d, 0.0);
  for (size_t j = 0; j < d; ++j) {
    // h1 = relu(pre1) * h_prev
    da1[j] = cache.pre1[j] > 0.0 ? dh1[j] * cache.h_prev[j] : 0.0;
    dh_prev[j] += dh1[j] * std::max(cache.pre1[j], 0.0);
    da2[j] = cache.pre2[j] > 0.0 ? dh2[j] * cache.h_cur[j] : 0.0;
  }
  add_outer(grad.w_prev, da1, cache.h_prev);
  add_outer(grad.w_path1, da1, cache.h_path);
  axpy(1.0, da1, grad.b1);
  add_outer(grad.w_cur, da2, cache.h_cur);
  add_outer(grad.w_path2, da2, cache.h_path);
  axpy(1.0, da2, grad.b2);

  axpy(1.0, matTvec(g.w_prev, da1), dh_prev);
  axpy(1.0, matTvec(g.w_path1, da1), dh_path);
  axpy(1.0, matTvec(g.w_path2, da2), dh_path);
}

Vec init_first_item(const Vec &h_item, const Vec &h_path_user, const GateParams &g,
                    FirstItemCache *cache) {
  const size_t d = h_item.size();
  if (h_path_user.size() != d)
    throw std::invalid_argument("init_first_item: dimension mismatch");
  Vec pre = matvec(g.w_cur, h_item);
  axpy(1.0, matvec(g.w_path_user, h_path_user), pre);
  axpy(1.0, g.b_user, pre);
  Vec out(d);
  for (size_t j = 0; j < d; ++j) out[j] = std::max(pre[j], 0.0) * h_item[j];
  if (cache) {
    cache->h_item = h_item;
    cache->h_path = h_path_user;
    cache->pre = std::move(pre);
  }
  return out;
}

void init_first_item_backward(const Vec &dh, const FirstItemCache &cache,
                              const GateParams &g, GateParams &grad, Vec &dh_path) {
  const size_t d = cache.h_item.size();
  Vec da(d);
  for (size_t j = 0; j < d; ++j)
    da[j] = cache.pre[j] > 0.0 ? dh[j] * cache.h_item[j] : 0.0;
  add_outer(grad.w_cur, da, cache.h_item);
  add_outer(grad.w_path_user, da, cache.h_path);
  axpy(1.0, da, grad.b_user);
  dh_path.assign(d, 0.0);
  axpy(1.0, matTvec(g.w_path_user, da), dh_path);
}

double mlp_logit(const Vec &input, const MlpParams &mlp, MlpCache *cache) {
  if (static_cast<int>(input.size()) != mlp.w.front().cols)
    throw std::invalid_argument("mlp: input width mismatch");
  Vec act = input;
  std::vector<Vec> pres;
  for (size_t l = 0; l < mlp.w.size(); ++l) {
    Vec pre = matvec(mlp.w[l], act);
    axpy(1.0, mlp.b[l], pre);
    pres.push_back(pre);
    if (l + 1 < mlp.w.size()) {
      act.resize(pre.size());
      for (size_t j = 0; j < pre.size(); ++j) act[j] = std::max(pre[j], 0.0);
    } else {
      act = pre;
    }
  }
  if (cache) {
    cache->input = input;
    cache->pre = std::move(pres);
  }
  return act[0];
}

Vec mlp_backward(double dlogit, const MlpCache &cache, const MlpParams &mlp,
                 MlpParams &grad) {
  Vec dact{dlogit};
  for (int l = static_cast<int>(mlp.w.size()) - 1; l >= 0; --l) {
    Vec dpre = dact;
    if (l + 1 < static_cast<int>(mlp.w.size()))
      for (size_t j = 0; j < dpre.size(); ++j)
        if (cache.pre[l][j] <= 0.0) dpre[j] = 0.0;
    // activation feeding layer l
    Vec in;
    if (l == 0) {
      in = cache.input;
    } else {
      in.resize(cache.pre[l - 1].size());
      for (size_t j = 0; j < in.size(); ++j) in[j] = std::max(cache.pre[l - 1][j], 0.0);
    }
    add_outer(grad.w[l], dpre, in);
    axpy(1.0, dpre, grad.b[l]);
    dact = matTvec(mlp.w[l], dpre);
  }
  return dact;
}

namespace {
Vec concat3(const Vec &a, const Vec &b, const Vec &c) {
  Vec out;
  out.reserve(a.size() + b.size() + c.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), c.begin(), c.end());
  return out;
}
} // namespace

double score(const Vec &h_u, const Vec &h1, const Vec &h2, const MlpParams &mlp) {
  return sigmoid(mlp_logit(concat3(h_u, h1, h2), mlp));
}

double score_first(const Vec &h_u, const Vec &h_user_path, const Vec &h_first,
                   const MlpParams &mlp) {
  return sigmoid(mlp_logit(concat3(h_u, h_user_path, h_first), mlp));
}

namespace {
constexpr char kCkptMagic[8] = {'T', 'M', 'E', 'R', 'C', 'K', 'P', '1'};
}

void save_checkpoint(const ModelParams &p, const std::string &path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f.write(kCkptMagic, 8);
  int32_t dim = p.dim, heads = p.heads;
  f.write(reinterpret_cast<const char *>(&dim), 4);
  f.write(reinterpret_cast<const char *>(&heads), 4);
  auto sizes = mlp_sizes(p.dim);
  int32_t n_layers = static_cast<int32_t>(sizes.size());
  f.write(reinterpret_cast<const char *>(&n_layers), 4);
  for (int s : sizes) {
    int32_t v = s;
    f.write(reinterpret_cast<const char *>(&v), 4);
  }
  ModelParams &mut = const_cast<ModelParams &>(p);
  for_each_tensor(mut, [&](std::vector<double> &t, const std::string &) {
    f.write(reinterpret_cast<const char *>(t.data()), sizeof(double) * t.size());
  });
  if (!f) throw std::runtime_error("checkpoint write failed: " + path);
}

ModelParams load_checkpoint(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kCkptMagic, 8) != 0)
    throw std::runtime_error("bad checkpoint magic: " + path);
  int32_t dim = 0, heads = 0, n_layers = 0;
  f.read(reinterpret_cast<char *>(&dim), 4);
  f.read(reinterpret_cast<char *>(&heads), 4);
  f.read(reinterpret_cast<char *>(&n_layers), 4);
  std::vector<int32_t> sizes(n_layers);
  for (auto &s : sizes) f.read(reinterpret_cast<char *>(&s), 4);
  ModelParams p = init_params(dim, heads, 0);
  for_each_tensor(p, [&](std::vector<double> &t, const std::string &) {
    f.read(reinterpret_cast<char *>(t.data()), sizeof(double) * t.size());
  });
  if (!f) throw std::runtime_error("truncated checkpoint: " + path);
  return p;
}

} // namespace tmer
