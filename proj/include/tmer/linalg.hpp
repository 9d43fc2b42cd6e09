#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace tmer {

using Vec = std::vector<double>;

// Dense row-major matrix. Small sizes only (attention projections, MLP
// layers); no BLAS needed at this scale.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double &operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  bool empty() const { return rows == 0 || cols == 0; }
};

inline double dot(const Vec &a, const Vec &b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec &a) { return std::sqrt(dot(a, a)); }

// y = A x
inline Vec matvec(const Mat &a, const Vec &x) {
  assert(static_cast<int>(x.size()) == a.cols);
  Vec y(a.rows, 0.0);
  for (int r = 0; r < a.rows; ++r) {
    double s = 0.0;
    const double *row = &a.data[static_cast<size_t>(r) * a.cols];
    for (int c = 0; c < a.cols; ++c) s += row[c] * x[c];
    y[r] = s;
  }
  return y;
}

// y = A^T x
inline Vec matTvec(const Mat &a, const Vec &x) {
  assert(static_cast<int>(x.size()) == a.rows);
  Vec y(a.cols, 0.0);
  for (int r = 0; r < a.rows; ++r) {
    const double *row = &a.data[static_cast<size_t>(r) * a.cols];
    for (int c = 0; c < a.cols; ++c) y[c] += row[c] * x[r];
  }
  return y;
}

// A += u v^T
inline void add_outer(Mat &a, const Vec &u, const Vec &v) {
  assert(static_cast<int>(u.size()) == a.rows && static_cast<int>(v.size()) == a.cols);
  for (int r = 0; r < a.rows; ++r) {
    double *row = &a.data[static_cast<size_t>(r) * a.cols];
    for (int c = 0; c < a.cols; ++c) row[c] += u[r] * v[c];
  }
}

// C = A B
inline Mat matmul(const Mat &a, const Mat &b) {
  assert(a.cols == b.rows);
  Mat c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

// C = A B^T
inline Mat matmul_bt(const Mat &a, const Mat &b) {
  assert(a.cols == b.cols);
  Mat c(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.rows; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += a(i, k) * b(j, k);
      c(i, j) = s;
    }
  return c;
}

// C = A^T B
inline Mat matmul_at(const Mat &a, const Mat &b) {
  assert(a.rows == b.rows);
  Mat c(a.cols, b.cols);
  for (int k = 0; k < a.rows; ++k)
    for (int i = 0; i < a.cols; ++i) {
      double aki = a(k, i);
      if (aki == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) c(i, j) += aki * b(k, j);
    }
  return c;
}

inline void axpy(double alpha, const Vec &x, Vec &y) {
  assert(x.size() == y.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(const Vec &v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool all_finite(const Mat &m) {
  for (double x : m.data)
    if (!std::isfinite(x)) return false;
  return true;
}

} // namespace tmer
