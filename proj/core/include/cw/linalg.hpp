#pragma once

#include <optional>
#include <vector>

#include "cw/scalar.hpp"

namespace cw {

// Dense Gaussian elimination helpers over an exact field (also usable with
// complex doubles; pivoting is by magnitude).
template <class F>
using Mat = std::vector<std::vector<F>>;

// Solve A z = b.  Returns a solution if one exists.
template <class F>
std::optional<std::vector<F>> solve_linear(Mat<F> a, std::vector<F> b, double tol = 0.0) {
  const int rows = (int)a.size();
  const int cols = rows ? (int)a[0].size() : 0;
  std::vector<int> pivot_col;
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int best = -1;
    double bestmag = tol;
    for (int i = r; i < rows; ++i) {
      double m = field_traits<F>::abs(a[i][c]);
      if (!field_traits<F>::is_zero(a[i][c]) && m > bestmag) { best = i; bestmag = m; if (field_traits<F>::exact) break; }
    }
    if (best < 0) continue;
    std::swap(a[r], a[best]);
    std::swap(b[r], b[best]);
    F inv = F(1) / a[r][c];
    for (int j = c; j < cols; ++j) a[r][j] *= inv;
    b[r] = b[r] * inv;
    for (int i = 0; i < rows; ++i) {
      if (i == r || field_traits<F>::is_zero(a[i][c])) continue;
      F f = a[i][c];
      for (int j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
      b[i] -= f * b[r];
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (int i = r; i < rows; ++i)
    if (field_traits<F>::abs(b[i]) > tol) return std::nullopt;
  std::vector<F> z(cols, F(0));
  for (int i = 0; i < r; ++i) z[pivot_col[i]] = b[i];
  return z;
}

template <class F>
int rank(Mat<F> a, double tol = 0.0) {
  const int rows = (int)a.size();
  const int cols = rows ? (int)a[0].size() : 0;
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int best = -1;
    for (int i = r; i < rows; ++i)
      if (field_traits<F>::abs(a[i][c]) > tol && !field_traits<F>::is_zero(a[i][c])) { best = i; break; }
    if (best < 0) continue;
    std::swap(a[r], a[best]);
    F inv = F(1) / a[r][c];
    for (int j = c; j < cols; ++j) a[r][j] *= inv;
    for (int i = 0; i < rows; ++i) {
      if (i == r || field_traits<F>::is_zero(a[i][c])) continue;
      F f = a[i][c];
      for (int j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
    }
    ++r;
  }
  return r;
}

}  // namespace cw
