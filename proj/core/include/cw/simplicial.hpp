#pragma once

// Finite oriented simplicial complexes with coordinates, barycentric
// subdivision, stars, matrix-valued cochains, simplicial maps, chains and
// pairings.  Simplices are stored as sorted vertex tuples; a sign of the
// sorting permutation reconciles user input given in another order.

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cw/graded.hpp"
#include "cw/perm.hpp"

namespace cw {

using Simplex = std::vector<int>;  // sorted vertex ids

// sign of a permutation of 0..n-1 given as an image list
inline int perm_sign(const std::vector<int>& perm) {
  int sign = 1;
  std::vector<int> p = perm;
  for (size_t i = 0; i < p.size(); ++i)
    while (p[i] != (int)i) {
      std::swap(p[i], p[p[i]]);
      sign = -sign;
    }
  return sign;
}

// sort a vertex tuple, returning the permutation sign (0 if repeated vertex)
inline std::pair<Simplex, int> normalize_simplex(Simplex s) {
  int sign = 1;
  for (size_t i = 1; i < s.size(); ++i)
    for (size_t j = i; j > 0 && s[j] < s[j - 1]; --j) {
      std::swap(s[j], s[j - 1]);
      sign = -sign;
    }
  for (size_t i = 1; i < s.size(); ++i)
    if (s[i] == s[i - 1]) return {s, 0};
  return {s, sign};
}

// CoordF: coordinate scalar, Rat for the exact pipeline or double for
// irrational geometry (icosahedron).
template <class CoordF>
struct SimplicialComplex {
  int ambient = 0;
  std::vector<std::vector<CoordF>> coords;       // per vertex id
  std::vector<std::vector<Simplex>> cells;       // cells[k], lexicographically sorted
  std::vector<std::map<Simplex, int>> index;     // cells[k] lookup

  int dim() const { return (int)cells.size() - 1; }
  int num(int k) const { return (k < 0 || k > dim()) ? 0 : (int)cells[k].size(); }
  const Simplex& cell(int k, int i) const { return cells[k][i]; }
  int cell_index(const Simplex& s) const {
    int k = (int)s.size() - 1;
    if (k < 0 || k > dim()) return -1;
    auto it = index[k].find(s);
    return it == index[k].end() ? -1 : it->second;
  }
  bool contains(const Simplex& s) const { return cell_index(s) >= 0; }

  // insert a simplex together with all of its faces
  void add_with_faces(const Simplex& sorted) {
    int k = (int)sorted.size() - 1;
    if ((int)cells.size() <= k) { cells.resize(k + 1); index.resize(k + 1); }
    if (index[k].count(sorted)) return;
    index[k][sorted] = -1;  // placeholder, renumbered in finalize()
    cells[k].push_back(sorted);
    if (k == 0) return;
    for (int drop = 0; drop <= k; ++drop) {
      Simplex f;
      for (int i = 0; i <= k; ++i)
        if (i != drop) f.push_back(sorted[i]);
      add_with_faces(f);
    }
  }

  void finalize() {
    for (int k = 0; k <= dim(); ++k) {
      std::sort(cells[k].begin(), cells[k].end());
      for (int i = 0; i < (int)cells[k].size(); ++i) index[k][cells[k][i]] = i;
    }
  }

  // every face of every cell present, vertex ids valid
  bool closed_under_faces() const {
    for (int k = 1; k <= dim(); ++k)
      for (auto& s : cells[k]) {
        for (int v : s)
          if (v < 0 || v >= (int)coords.size()) return false;
        for (int drop = 0; drop <= k; ++drop) {
          Simplex f;
          for (int i = 0; i <= k; ++i)
            if (i != drop) f.push_back(s[i]);
          if (!contains(f)) return false;
        }
      }
    return true;
  }

  double edge_length(int v, int w) const {
    double s = 0;
    for (int a = 0; a < ambient; ++a) {
      double d = field_traits_coord(coords[v][a]) - field_traits_coord(coords[w][a]);
      s += d * d;
    }
    return std::sqrt(s);
  }
  static double field_traits_coord(const CoordF& x) {
    if constexpr (std::is_same_v<CoordF, double>) return x;
    else return x.template convert_to<double>();
  }

  // longest edge of the complex
  double mesh() const {
    double m = 0;
    if (dim() < 1) return 0;
    for (auto& e : cells[1]) m = std::max(m, edge_length(e[0], e[1]));
    return m;
  }

  // n-volume of a top simplex via the Gram determinant of its edge vectors
  double volume(const Simplex& s) const {
    int n = (int)s.size() - 1;
    if (n == 0) return 1.0;
    std::vector<std::vector<double>> e(n, std::vector<double>(ambient));
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < ambient; ++a)
        e[i][a] = field_traits_coord(coords[s[i + 1]][a]) - field_traits_coord(coords[s[0]][a]);
    std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < ambient; ++a) g[i][j] += e[i][a] * e[j][a];
    // Cholesky-free determinant: Gaussian elimination
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
      int piv = c;
      for (int r = c + 1; r < n; ++r)
        if (std::abs(g[r][c]) > std::abs(g[piv][c])) piv = r;
      if (std::abs(g[piv][c]) < 1e-300) return 0.0;
      if (piv != c) std::swap(g[piv], g[c]);
      det *= g[c][c];
      for (int r = c + 1; r < n; ++r) {
        double f = g[r][c] / g[c][c];
        for (int cc = c; cc < n; ++cc) g[r][cc] -= f * g[c][cc];
      }
    }
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    return std::sqrt(std::abs(det)) / fact;
  }

  // min over top simplices of n! vol / mesh^n; bounded below under
  // barycentric refinement schedules of the builtins
  double fullness() const {
    int n = dim();
    double h = mesh();
    if (h == 0 || n == 0) return 1.0;
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    double best = 1e300;
    for (auto& s : cells[n]) best = std::min(best, fact * volume(s) / std::pow(h, n));
    return best;
  }
};

// --- builtins --------------------------------------------------------------

// standard n-simplex, vertices 0 and the unit coordinate vectors of R^n
template <class CoordF>
SimplicialComplex<CoordF> standard_simplex(int n) {
  if (n < 0) throw std::invalid_argument("standard_simplex: negative dimension");
  SimplicialComplex<CoordF> X;
  X.ambient = std::max(n, 1);
  for (int v = 0; v <= n; ++v) {
    std::vector<CoordF> c(X.ambient, CoordF(0));
    if (v > 0) c[v - 1] = CoordF(1);
    X.coords.push_back(c);
  }
  Simplex top(n + 1);
  for (int v = 0; v <= n; ++v) top[v] = v;
  X.add_with_faces(top);
  X.finalize();
  return X;
}

// boundary of the octahedron: vertices +-e_i in R^3, 8 triangles; an exact
// rational model of the 2-sphere
template <class CoordF>
SimplicialComplex<CoordF> octahedron_boundary() {
  SimplicialComplex<CoordF> X;
  X.ambient = 3;
  for (int a = 0; a < 3; ++a)
    for (int s = 0; s < 2; ++s) {
      std::vector<CoordF> c(3, CoordF(0));
      c[a] = s ? CoordF(-1) : CoordF(1);
      X.coords.push_back(c);  // 2a = +e_a, 2a+1 = -e_a
    }
  for (int sx = 0; sx < 2; ++sx)
    for (int sy = 0; sy < 2; ++sy)
      for (int sz = 0; sz < 2; ++sz) {
        Simplex t = {0 + sx, 2 + sy, 4 + sz};
        X.add_with_faces(normalize_simplex(t).first);
      }
  X.finalize();
  return X;
}

// boundary of the icosahedron (unit circumradius after scaling is skipped;
// coordinates use the golden ratio, hence double only)
inline SimplicialComplex<double> icosahedron_boundary() {
  SimplicialComplex<double> X;
  X.ambient = 3;
  double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  // cyclic permutations of (0, +-1, +-phi)
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2) {
      double a = s1 ? -1.0 : 1.0, b = s2 ? -phi : phi;
      X.coords.push_back({0, a, b});
      X.coords.push_back({a, b, 0});
      X.coords.push_back({b, 0, a});
    }
  // faces: triples of vertices at mutual distance 2
  int n = (int)X.coords.size();
  auto close = [&X](int u, int v) {
    double d = X.edge_length(u, v);
    return std::abs(d - 2.0) < 1e-9;
  };
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      for (int w = v + 1; w < n; ++w)
        if (close(u, v) && close(v, w) && close(u, w)) X.add_with_faces({u, v, w});
  X.finalize();
  return X;
}

// torus of revolution, 3x3 vertex grid (radii 2 and 1), 18 triangles
template <class CoordF>
SimplicialComplex<CoordF> torus_complex() {
  SimplicialComplex<CoordF> X;
  X.ambient = 3;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double u = 2.0 * M_PI * i / 3.0, v = 2.0 * M_PI * j / 3.0;
      double r = 2.0 + std::cos(v);
      if constexpr (std::is_same_v<CoordF, double>) {
        X.coords.push_back({r * std::cos(u), r * std::sin(u), std::sin(v)});
      } else {
        // rational approximation keeps the exact pipeline usable; only the
        // combinatorics matter for the cochain complex
        auto q = [](double x) { return CoordF((long)std::lround(x * 720), 720); };
        X.coords.push_back({q(r * std::cos(u)), q(r * std::sin(u)), q(std::sin(v))});
      }
    }
  auto id = [](int i, int j) { return 3 * ((i + 3) % 3) + (j + 3) % 3; };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      X.add_with_faces(normalize_simplex({id(i, j), id(i + 1, j), id(i + 1, j + 1)}).first);
      X.add_with_faces(normalize_simplex({id(i, j), id(i, j + 1), id(i + 1, j + 1)}).first);
    }
  X.finalize();
  return X;
}

// --- chains, cochain complex ----------------------------------------------

// formal sum of oriented k-simplices
template <class F>
struct Chain {
  int k = 0;
  std::map<int, F> coeff;  // cell index -> coefficient

  void add(int idx, const F& c) {
    coeff[idx] += c;
    if (field_traits<F>::is_zero(coeff[idx])) coeff.erase(idx);
  }
};

template <class F, class CoordF>
Chain<F> boundary(const SimplicialComplex<CoordF>& X, const Chain<F>& z) {
  Chain<F> out;
  out.k = z.k - 1;
  if (z.k == 0) return out;
  for (auto& [idx, c] : z.coeff) {
    const Simplex& s = X.cell(z.k, idx);
    for (int drop = 0; drop <= z.k; ++drop) {
      Simplex f;
      for (int i = 0; i <= z.k; ++i)
        if (i != drop) f.push_back(s[i]);
      F v = c;
      if (drop & 1) v = -v;
      out.add(X.cell_index(f), v);
    }
  }
  return out;
}

// Signed sum of the top cells forming a cycle, oriented by propagating
// matching induced orientations across shared codimension 1 faces.  Requires
// each ridge to lie in at most two top cells (pseudomanifold, possibly with
// boundary); throws when no consistent orientation exists.
template <class F, class CoordF>
Chain<F> fundamental_cycle(const SimplicialComplex<CoordF>& X) {
  int n = X.dim();
  int N = X.num(n);
  // ridge -> incident (cell, face position parity)
  std::map<Simplex, std::vector<std::pair<int, int>>> inc;
  for (int i = 0; i < N; ++i) {
    const Simplex& s = X.cell(n, i);
    for (int drop = 0; drop <= n; ++drop) {
      Simplex f;
      for (int j = 0; j <= n; ++j)
        if (j != drop) f.push_back(s[j]);
      inc[f].push_back({i, drop & 1});
    }
  }
  std::vector<int> sign(N, 0);
  for (int seed = 0; seed < N; ++seed) {
    if (sign[seed]) continue;
    sign[seed] = 1;
    std::deque<int> q = {seed};
    while (!q.empty()) {
      int i = q.front();
      q.pop_front();
      const Simplex& s = X.cell(n, i);
      for (int drop = 0; drop <= n; ++drop) {
        Simplex f;
        for (int j = 0; j <= n; ++j)
          if (j != drop) f.push_back(s[j]);
        auto& lst = inc[f];
        if (lst.size() > 2) throw std::invalid_argument("fundamental_cycle: ridge in >2 cells");
        for (auto& [i2, par2] : lst) {
          if (i2 == i) continue;
          // boundary terms must cancel: sign_i (-1)^{drop} + sign_{i2} (-1)^{par2} = 0
          int want = -(sign[i] * ((drop & 1) ? -1 : 1)) * ((par2 & 1) ? -1 : 1);
          if (sign[i2] == 0) {
            sign[i2] = want;
            q.push_back(i2);
          } else if (sign[i2] != want) {
            throw std::invalid_argument("fundamental_cycle: complex is not orientable");
          }
        }
      }
    }
  }
  Chain<F> z;
  z.k = n;
  for (int i = 0; i < N; ++i) z.add(i, F(sign[i]));
  return z;
}

// Graded space of l x l matrix valued cochains: degree k has one block of
// l^2 entries per k-cell, flattened as (cell * l + row) * l + col.
template <class CoordF>
GradedSpacePtr cochain_space(const SimplicialComplex<CoordF>& X, int l) {
  auto gs = std::make_shared<GradedSpace>();
  gs->dims.resize(X.dim() + 1);
  for (int k = 0; k <= X.dim(); ++k) gs->dims[k] = X.num(k) * l * l;
  return gs;
}

inline int cochain_index(int cell, int row, int col, int l) { return (cell * l + row) * l + col; }

// simplicial coboundary on matrix cochains: (d c)(tau) = sum_i (-1)^i c(d_i tau)
template <class F, class CoordF>
LinMap<F> coboundary_map(const SimplicialComplex<CoordF>& X, GradedSpacePtr sp, int l) {
  LinMap<F> d(sp, sp, 1);
  for (int k = 0; k + 1 <= X.dim(); ++k) {
    for (int t = 0; t < X.num(k + 1); ++t) {
      const Simplex& s = X.cell(k + 1, t);
      for (int drop = 0; drop <= k + 1; ++drop) {
        Simplex f;
        for (int j = 0; j <= k + 1; ++j)
          if (j != drop) f.push_back(s[j]);
        int fi = X.cell_index(f);
        F c = (drop & 1) ? F(-1) : F(1);
        for (int r = 0; r < l; ++r)
          for (int cc = 0; cc < l; ++cc)
            d.at(k, cochain_index(t, r, cc, l), cochain_index(fi, r, cc, l)) += c;
      }
    }
  }
  return d;
}

// trace map to scalar cochains (l = 1 target)
template <class F, class CoordF>
LinMap<F> cochain_trace(const SimplicialComplex<CoordF>& X, GradedSpacePtr mat_sp,
                        GradedSpacePtr scal_sp, int l) {
  LinMap<F> tr(mat_sp, scal_sp, 0);
  for (int k = 0; k <= X.dim(); ++k)
    for (int t = 0; t < X.num(k); ++t)
      for (int r = 0; r < l; ++r) tr.at(k, t, cochain_index(t, r, r, l)) += F(1);
  return tr;
}

// <c, z>: sum of matrix values weighted by chain coefficients
template <class F, class CoordF>
std::vector<F> pair_chain(const SimplicialComplex<CoordF>& X, const Elt<F>& c, int l,
                          const Chain<F>& z) {
  if (c.is_zero()) return std::vector<F>(l * l, F(0));
  if (c.degree() != z.k) throw std::invalid_argument("pair_chain: degree mismatch");
  (void)X;
  std::vector<F> out(l * l, F(0));
  for (auto& [idx, w] : z.coeff)
    for (int r = 0; r < l; ++r)
      for (int cc = 0; cc < l; ++cc) out[r * l + cc] += w * c.coeff(z.k, cochain_index(idx, r, cc, l));
  return out;
}

template <class F>
F matrix_trace_value(const std::vector<F>& m, int l) {
  F t(0);
  for (int r = 0; r < l; ++r) t += m[r * l + r];
  return t;
}

// --- simplicial maps -------------------------------------------------------

template <class CoordF>
struct SimplicialMap {
  const SimplicialComplex<CoordF>* src = nullptr;
  const SimplicialComplex<CoordF>* dst = nullptr;
  std::vector<int> vmap;  // vertex id in src -> vertex id in dst

  // image of a simplex: sorted image tuple and sign; nullopt if degenerate
  std::optional<std::pair<Simplex, int>> image(const Simplex& s) const {
    Simplex im;
    for (int v : s) im.push_back(vmap[v]);
    auto [sorted, sign] = normalize_simplex(im);
    if (sign == 0) return std::nullopt;
    if (!dst->contains(sorted))
      throw std::invalid_argument("SimplicialMap: image of a simplex is not a simplex");
    return std::make_pair(sorted, sign);
  }

  bool valid() const {
    if ((int)vmap.size() != (int)src->coords.size()) return false;
    for (int k = 0; k <= src->dim(); ++k)
      for (auto& s : src->cells[k]) {
        Simplex im;
        for (int v : s) im.push_back(vmap[v]);
        auto [sorted, sign] = normalize_simplex(im);
        if (sign == 0) {
          // degenerate image: the image vertex set still must span a simplex
          Simplex uniq = sorted;
          uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
          if (!dst->contains(uniq)) return false;
        } else if (!dst->contains(sorted)) {
          return false;
        }
      }
    return true;
  }
};

// (phi^* c)(sigma) = sign * c(phi(sigma)), zero on degenerate images
template <class F, class CoordF>
Elt<F> pullback_cochain(const SimplicialMap<CoordF>& phi, const Elt<F>& c, GradedSpacePtr src_sp,
                        int l) {
  Elt<F> out(src_sp);
  for (auto& [k, v] : c.comp) {
    for (int t = 0; t < phi.src->num(k); ++t) {
      auto im = phi.image(phi.src->cell(k, t));
      if (!im) continue;
      int ti = phi.dst->cell_index(im->first);
      for (int r = 0; r < l; ++r)
        for (int cc = 0; cc < l; ++cc) {
          F val = v[cochain_index(ti, r, cc, l)];
          if (field_traits<F>::is_zero(val)) continue;
          if (im->second < 0) val = -val;
          out.add_to(k, cochain_index(t, r, cc, l), val);
        }
    }
  }
  out.prune();
  return out;
}

// --- stars and subdivision -------------------------------------------------

// all simplices containing s, closed under faces; returned as a complex
// sharing the vertex coordinates of X
template <class CoordF>
SimplicialComplex<CoordF> star(const SimplicialComplex<CoordF>& X, const Simplex& s) {
  if (!X.contains(s)) throw std::invalid_argument("star: simplex not in complex");
  SimplicialComplex<CoordF> out;
  out.ambient = X.ambient;
  out.coords = X.coords;
  for (int k = (int)s.size() - 1; k <= X.dim(); ++k)
    for (auto& c : X.cells[k])
      if (std::includes(c.begin(), c.end(), s.begin(), s.end())) out.add_with_faces(c);
  out.finalize();
  return out;
}

template <class CoordF>
struct SubdivisionData {
  SimplicialComplex<CoordF> fine;
  // fine vertex id -> parent simplex of the coarse complex
  std::vector<Simplex> vertex_parent;
  // fine top cell index -> (coarse top cell index, orientation sign)
  std::vector<std::pair<int, int>> top_parent;
  double coarse_mesh = 0, fine_mesh = 0, fine_fullness = 0;
};

// barycentric subdivision: one vertex per simplex, top cells are flags
template <class CoordF>
SubdivisionData<CoordF> subdivide_barycentric(const SimplicialComplex<CoordF>& X) {
  SubdivisionData<CoordF> out;
  SimplicialComplex<CoordF>& Y = out.fine;
  Y.ambient = X.ambient;
  int n = X.dim();
  // vertex per simplex: barycenter
  std::vector<std::vector<int>> vid(n + 1);
  for (int k = 0; k <= n; ++k) {
    vid[k].resize(X.num(k));
    for (int i = 0; i < X.num(k); ++i) {
      const Simplex& s = X.cell(k, i);
      std::vector<CoordF> c(X.ambient, CoordF(0));
      for (int v : s)
        for (int a = 0; a < X.ambient; ++a) c[a] += X.coords[v][a];
      for (int a = 0; a < X.ambient; ++a) c[a] = c[a] / CoordF(k + 1);
      vid[k][i] = (int)Y.coords.size();
      Y.coords.push_back(c);
      out.vertex_parent.push_back(s);
    }
  }
  // top cells: flags sigma_0 c ... c sigma_n inside each top cell of X.
  // A flag is an ordering of the parent's vertices (sigma_j adds vertex
  // pi(j)); its orientation relative to the parent is the sign of pi.
  struct Flag { Simplex cell; int parent; int sign; };
  std::vector<Flag> flags;
  for (int t = 0; t < X.num(n); ++t) {
    const Simplex& s = X.cell(n, t);
    std::vector<int> perm(n + 1);
    for (int i = 0; i <= n; ++i) perm[i] = i;
    do {
      Simplex cell;
      Simplex sub;
      for (int j = 0; j <= n; ++j) {
        sub.push_back(s[perm[j]]);
        auto [sorted, sgn] = normalize_simplex(sub);
        sub = sorted;
        (void)sgn;
        cell.push_back(vid[j][X.cell_index(sub)]);
      }
      auto [sorted, sgn] = normalize_simplex(cell);
      flags.push_back({sorted, t, sgn * perm_sign(perm)});
      Y.add_with_faces(sorted);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  // lower-dimensional coarse cells that are not faces of a top cell still
  // need their flags present; add_with_faces above covers everything for
  // pure complexes, which the builtins are
  Y.finalize();
  out.top_parent.assign(Y.num(n), {-1, 0});
  for (auto& f : flags) out.top_parent[Y.cell_index(f.cell)] = {f.parent, f.sign};
  out.coarse_mesh = X.mesh();
  out.fine_mesh = Y.mesh();
  out.fine_fullness = Y.fullness();
  return out;
}

// The last vertex map: the barycenter of sigma goes to the largest vertex of
// sigma.  This is the standard simplicial approximation of the identity for
// a barycentric subdivision.
template <class CoordF>
SimplicialMap<CoordF> last_vertex_map(const SubdivisionData<CoordF>& sd,
                                      const SimplicialComplex<CoordF>& coarse) {
  SimplicialMap<CoordF> phi;
  phi.src = &sd.fine;
  phi.dst = &coarse;
  for (auto& parent : sd.vertex_parent) phi.vmap.push_back(parent.back());
  return phi;
}

// fundamental cycle of the subdivision, oriented consistently with the given
// cycle of the coarse complex
template <class F, class CoordF>
Chain<F> aligned_fine_cycle(const SubdivisionData<CoordF>& sd, const Chain<F>& coarse) {
  Chain<F> z = fundamental_cycle<F>(sd.fine);
  if (z.coeff.empty()) return z;
  auto& [idx, c] = *z.coeff.begin();
  F want = coarse.coeff.at(sd.top_parent[idx].first) * F(sd.top_parent[idx].second);
  F diff = want - c;
  if (!field_traits<F>::is_zero(diff))
    for (auto& [i, cc] : z.coeff) cc = -cc;
  return z;
}

}  // namespace cw
