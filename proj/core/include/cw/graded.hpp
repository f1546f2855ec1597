#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cw/scalar.hpp"

namespace cw {

// Finite non-negatively graded vector space: dims[p] is the dimension in
// degree p.  Basis labels are optional and purely cosmetic.
struct GradedSpace {
  std::vector<int> dims;
  std::vector<std::vector<std::string>> labels;

  GradedSpace() = default;
  explicit GradedSpace(std::vector<int> d) : dims(std::move(d)) {}

  int dim(int p) const {
    if (p < 0 || p >= (int)dims.size()) return 0;
    return dims[p];
  }
  int top_degree() const {
    for (int p = (int)dims.size() - 1; p >= 0; --p)
      if (dims[p] > 0) return p;
    return -1;
  }
  int total_dim() const {
    int t = 0;
    for (int d : dims) t += d;
    return t;
  }
  std::string label(int p, int j) const {
    if (p < (int)labels.size() && j < (int)labels[p].size()) return labels[p][j];
    return "e(" + std::to_string(p) + "," + std::to_string(j) + ")";
  }
  bool operator==(const GradedSpace& o) const { return dims == o.dims; }
};

using GradedSpacePtr = std::shared_ptr<const GradedSpace>;

// Element of a graded space, possibly spread over several degrees.
// Per-degree components are dense vectors (desk scale dimensions).
template <class F>
struct Elt {
  GradedSpacePtr sp;
  std::map<int, std::vector<F>> comp;

  Elt() = default;
  explicit Elt(GradedSpacePtr s) : sp(std::move(s)) {}

  static Elt basis(GradedSpacePtr s, int p, int j) {
    Elt e(s);
    e.comp[p] = std::vector<F>(s->dim(p), F(0));
    e.comp[p][j] = F(1);
    return e;
  }

  bool is_zero() const {
    for (auto& [p, v] : comp)
      for (auto& c : v)
        if (!field_traits<F>::is_zero(c)) return false;
    return true;
  }
  // Largest coefficient magnitude, as a residual measure in reports.
  double max_abs() const {
    double m = 0;
    for (auto& [p, v] : comp)
      for (auto& c : v) m = std::max(m, field_traits<F>::abs(c));
    return m;
  }
  // Degree of a homogeneous element; throws if mixed, -1 if zero.
  int degree() const {
    int deg = -1;
    for (auto& [p, v] : comp)
      for (auto& c : v)
        if (!field_traits<F>::is_zero(c)) {
          if (deg >= 0 && deg != p) throw std::logic_error("degree(): element not homogeneous");
          deg = p;
        }
    return deg;
  }
  bool is_homogeneous() const {
    int deg = -1;
    for (auto& [p, v] : comp)
      for (auto& c : v)
        if (!field_traits<F>::is_zero(c)) {
          if (deg >= 0 && deg != p) return false;
          deg = p;
        }
    return true;
  }
  F coeff(int p, int j) const {
    auto it = comp.find(p);
    if (it == comp.end()) return F(0);
    return it->second[j];
  }
  void add_to(int p, int j, const F& c) {
    auto& v = comp[p];
    if (v.empty()) v.assign(sp->dim(p), F(0));
    v[j] += c;
  }
  void prune() {
    for (auto it = comp.begin(); it != comp.end();) {
      bool zero = true;
      for (auto& c : it->second)
        if (!field_traits<F>::is_zero(c)) { zero = false; break; }
      it = zero ? comp.erase(it) : ++it;
    }
  }
  Elt& operator+=(const Elt& o) {
    for (auto& [p, v] : o.comp) {
      auto& w = comp[p];
      if (w.empty()) w.assign(sp->dim(p), F(0));
      for (size_t j = 0; j < v.size(); ++j) w[j] += v[j];
    }
    return *this;
  }
  Elt& operator-=(const Elt& o) {
    for (auto& [p, v] : o.comp) {
      auto& w = comp[p];
      if (w.empty()) w.assign(sp->dim(p), F(0));
      for (size_t j = 0; j < v.size(); ++j) w[j] -= v[j];
    }
    return *this;
  }
  Elt& operator*=(const F& c) {
    for (auto& [p, v] : comp)
      for (auto& x : v) x *= c;
    return *this;
  }
  friend Elt operator+(Elt a, const Elt& b) { a += b; return a; }
  friend Elt operator-(Elt a, const Elt& b) { a -= b; return a; }
  friend Elt operator*(const F& c, Elt a) { a *= c; return a; }

  bool equals(const Elt& o, double tol = 0.0) const {
    Elt d = *this;
    d -= o;
    if (field_traits<F>::exact) return d.is_zero();
    return d.max_abs() <= tol;
  }

  // Split into homogeneous pieces (nonzero ones only).
  std::vector<Elt> homogeneous_parts() const {
    std::vector<Elt> out;
    for (auto& [p, v] : comp) {
      bool zero = true;
      for (auto& c : v)
        if (!field_traits<F>::is_zero(c)) { zero = false; break; }
      if (zero) continue;
      Elt e(sp);
      e.comp[p] = v;
      out.push_back(std::move(e));
    }
    return out;
  }
};

// Degree-homogeneous linear map between graded spaces, stored as one dense
// matrix per input degree.  mat[d] has dim(target, d+shift) rows and
// dim(source, d) columns.
template <class F>
struct LinMap {
  GradedSpacePtr src, dst;
  int shift = 0;
  std::map<int, std::vector<std::vector<F>>> mat;  // input degree -> rows x cols

  LinMap() = default;
  LinMap(GradedSpacePtr s, GradedSpacePtr t, int sh) : src(std::move(s)), dst(std::move(t)), shift(sh) {}

  static LinMap zero(GradedSpacePtr s, GradedSpacePtr t, int sh) { return LinMap(s, t, sh); }
  static LinMap identity(GradedSpacePtr s) {
    LinMap m(s, s, 0);
    for (int p = 0; p <= s->top_degree(); ++p) {
      int n = s->dim(p);
      if (!n) continue;
      auto& a = m.mat[p];
      a.assign(n, std::vector<F>(n, F(0)));
      for (int j = 0; j < n; ++j) a[j][j] = F(1);
    }
    return m;
  }

  F& at(int p, int row, int col) {
    auto& a = mat[p];
    if (a.empty()) a.assign(dst->dim(p + shift), std::vector<F>(src->dim(p), F(0)));
    return a[row][col];
  }
  F get(int p, int row, int col) const {
    auto it = mat.find(p);
    if (it == mat.end()) return F(0);
    return it->second[row][col];
  }

  Elt<F> apply(const Elt<F>& x) const {
    Elt<F> y(dst);
    for (auto& [p, v] : x.comp) {
      auto it = mat.find(p);
      if (it == mat.end()) continue;
      auto& a = it->second;
      if (a.empty()) continue;
      int q = p + shift;
      if (dst->dim(q) == 0) continue;
      auto& w = y.comp[q];
      if (w.empty()) w.assign(dst->dim(q), F(0));
      for (size_t r = 0; r < a.size(); ++r)
        for (size_t c = 0; c < a[r].size(); ++c)
          if (!field_traits<F>::is_zero(a[r][c])) w[r] += a[r][c] * v[c];
    }
    y.prune();
    return y;
  }

  // this after g: (*this) o g
  LinMap compose(const LinMap& g) const {
    LinMap h(g.src, dst, shift + g.shift);
    for (auto& [p, gm] : g.mat) {
      auto it = mat.find(p + g.shift);
      if (it == mat.end()) continue;
      auto& fm = it->second;
      if (fm.empty() || gm.empty()) continue;
      int rows = (int)fm.size(), mid = (int)gm.size(), cols = (int)gm[0].size();
      auto& hm = h.mat[p];
      hm.assign(rows, std::vector<F>(cols, F(0)));
      for (int r = 0; r < rows; ++r)
        for (int m = 0; m < mid; ++m) {
          if (field_traits<F>::is_zero(fm[r][m])) continue;
          for (int c = 0; c < cols; ++c) hm[r][c] += fm[r][m] * gm[m][c];
        }
    }
    h.prune();
    return h;
  }

  LinMap& operator+=(const LinMap& o) {
    for (auto& [p, om] : o.mat) {
      if (om.empty()) continue;
      auto& m = mat[p];
      if (m.empty()) m.assign(om.size(), std::vector<F>(om[0].size(), F(0)));
      for (size_t r = 0; r < om.size(); ++r)
        for (size_t c = 0; c < om[r].size(); ++c) m[r][c] += om[r][c];
    }
    return *this;
  }
  LinMap& operator-=(const LinMap& o) {
    for (auto& [p, om] : o.mat) {
      if (om.empty()) continue;
      auto& m = mat[p];
      if (m.empty()) m.assign(om.size(), std::vector<F>(om[0].size(), F(0)));
      for (size_t r = 0; r < om.size(); ++r)
        for (size_t c = 0; c < om[r].size(); ++c) m[r][c] -= om[r][c];
    }
    return *this;
  }
  LinMap& operator*=(const F& c) {
    for (auto& [p, m] : mat)
      for (auto& row : m)
        for (auto& x : row) x *= c;
    return *this;
  }
  friend LinMap operator+(LinMap a, const LinMap& b) { a += b; return a; }
  friend LinMap operator-(LinMap a, const LinMap& b) { a -= b; return a; }

  bool is_zero() const {
    for (auto& [p, m] : mat)
      for (auto& row : m)
        for (auto& x : row)
          if (!field_traits<F>::is_zero(x)) return false;
    return true;
  }
  double max_abs() const {
    double r = 0;
    for (auto& [p, m] : mat)
      for (auto& row : m)
        for (auto& x : row) r = std::max(r, field_traits<F>::abs(x));
    return r;
  }
  void prune() {
    for (auto it = mat.begin(); it != mat.end();) {
      bool zero = true;
      for (auto& row : it->second)
        for (auto& x : row)
          if (!field_traits<F>::is_zero(x)) { zero = false; goto done; }
    done:
      it = zero ? mat.erase(it) : ++it;
    }
  }
};

}  // namespace cw
