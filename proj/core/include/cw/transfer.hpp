#pragma once

// Special contractions, the homological perturbation lemma (plain and with the
// tensor trick on the bar coalgebra), and the transfer of curved dg structures
// to a small complex, by two independent routes:
//   - perturbing the bar coderivation and corestricting (transfer_curved_dg_pl)
//   - summing decorated binary trees with geometric series on the edges
//     (transfer_curved_dg_trees)
// Both routes produce the structure maps m_n^B together with the morphisms
// I : B -> A^gamma and P : A^gamma -> B.

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cw/ainf.hpp"
#include "cw/fixtures.hpp"
#include "cw/linalg.hpp"
#include "cw/trees.hpp"

namespace cw {

// Tabulate an arity 1 operator as a plain linear map.
template <class F>
LinMap<F> to_linmap(const MultiOp<F>& op) {
  if (op.arity() != 1) throw std::invalid_argument("to_linmap: arity must be 1");
  LinMap<F> m(op.source(), op.target(), op.shift());
  auto sp = op.source();
  for (int deg = 0; deg <= sp->top_degree(); ++deg)
    for (int j = 0; j < sp->dim(deg); ++j) {
      Elt<F> y = op.apply({Elt<F>::basis(sp, deg, j)});
      for (auto& [q, v] : y.comp)
        for (int r = 0; r < (int)v.size(); ++r)
          if (!field_traits<F>::is_zero(v[r])) m.at(deg, r, j) += v[r];
    }
  m.prune();
  return m;
}

// --- Special contractions --------------------------------------------------

// (p, i) contract (big, d1) onto (small, d2); H is the homotopy, degree -1.
// small_weights is optional bookkeeping used to propagate nilpotency
// certificates to the transferred structure.
template <class F>
struct Contraction {
  GradedSpacePtr big, small;
  LinMap<F> d1, d2;  // degree +1
  LinMap<F> p, i;    // degree 0
  LinMap<F> H;       // degree -1
  std::map<int, std::vector<int>> small_weights;

  static Contraction identity_contraction(GradedSpacePtr sp, const LinMap<F>& d) {
    Contraction c;
    c.big = sp;
    c.small = sp;
    c.d1 = d;
    c.d2 = d;
    c.p = LinMap<F>::identity(sp);
    c.i = LinMap<F>::identity(sp);
    c.H = LinMap<F>(sp, sp, -1);
    return c;
  }
};

// Exact residuals for the contraction identities: both chain map conditions,
// p i = 1 on the small side, the homotopy identity i p - 1 = d H + H d, and
// the three annihilation conditions.
template <class F>
CheckReport verify_special(const Contraction<F>& c, double tol = 0.0) {
  CheckReport rep;
  auto note = [&](const LinMap<F>& r, const std::string& what) {
    double m = r.max_abs();
    bool ok = field_traits<F>::exact ? r.is_zero() : (m <= tol);
    rep.note(ok, m, what);
  };
  note(c.d2.compose(c.p) - c.p.compose(c.d1), "p is not a chain map");
  note(c.d1.compose(c.i) - c.i.compose(c.d2), "i is not a chain map");
  note(c.p.compose(c.i) - LinMap<F>::identity(c.small), "p i != 1");
  note(c.i.compose(c.p) - LinMap<F>::identity(c.big) - c.d1.compose(c.H) - c.H.compose(c.d1),
       "homotopy identity fails");
  note(c.H.compose(c.i), "H i != 0");
  note(c.p.compose(c.H), "p H != 0");
  note(c.H.compose(c.H), "H^2 != 0");
  return rep;
}

namespace detail {

// Reduced row echelon form; returns pivot columns.  a may have zero rows.
template <class F>
std::vector<int> rref(Mat<F>& a) {
  std::vector<int> pivots;
  const int rows = (int)a.size();
  const int cols = rows ? (int)a[0].size() : 0;
  int r = 0;
  for (int cidx = 0; cidx < cols && r < rows; ++cidx) {
    int best = -1;
    for (int i = r; i < rows; ++i)
      if (!field_traits<F>::is_zero(a[i][cidx])) { best = i; break; }
    if (best < 0) continue;
    std::swap(a[r], a[best]);
    F inv = F(1) / a[r][cidx];
    for (int j = 0; j < cols; ++j) a[r][j] *= inv;
    for (int i = 0; i < rows; ++i) {
      if (i == r || field_traits<F>::is_zero(a[i][cidx])) continue;
      F f = a[i][cidx];
      for (int j = 0; j < cols; ++j) a[i][j] -= f * a[r][j];
    }
    pivots.push_back(cidx);
    ++r;
  }
  return pivots;
}

// Incremental independence filter over a list of candidate vectors.
template <class F>
struct IndependentSet {
  std::vector<std::vector<F>> echelon;  // row echelon basis of the span

  bool insert(std::vector<F> v) {
    for (auto& e : echelon) {
      int lead = 0;
      while (lead < (int)e.size() && field_traits<F>::is_zero(e[lead])) ++lead;
      if (lead < (int)e.size() && !field_traits<F>::is_zero(v[lead])) {
        F f = v[lead] / e[lead];
        for (size_t j = 0; j < v.size(); ++j) v[j] -= f * e[j];
      }
    }
    for (auto& x : v)
      if (!field_traits<F>::is_zero(x)) {
        echelon.push_back(std::move(v));
        return true;
      }
    return false;
  }
};

}  // namespace detail

// Build a special contraction onto cohomology by exact Gaussian elimination.
// Per degree (and per weight class when weights are given and the
// differential is weight homogeneous) the space splits as
// image + harmonic + coimage; H inverts d from the image back into the
// coimage, p projects onto harmonic representatives and i includes them.
// The small differential is zero.  When built per weight class, H preserves
// the weight filtration, which is the nilpotency certificate used downstream.
template <class F>
Contraction<F> harmonic_contraction(GradedSpacePtr sp, const LinMap<F>& d,
                                    const std::map<int, std::vector<int>>* weights = nullptr) {
  const int top = sp->top_degree();
  auto weight_of = [&](int deg, int j) {
    if (!weights) return 0;
    auto it = weights->find(deg);
    if (it == weights->end() || j >= (int)it->second.size()) return 0;
    return it->second[j];
  };
  // per (degree, weight) class: member indices
  std::map<std::pair<int, int>, std::vector<int>> members;
  for (int deg = 0; deg <= top; ++deg)
    for (int j = 0; j < sp->dim(deg); ++j) members[{deg, weight_of(deg, j)}].push_back(j);
  // check the differential respects the classes
  if (weights)
    for (int deg = 0; deg <= top; ++deg)
      for (int j = 0; j < sp->dim(deg); ++j) {
        Elt<F> y = d.apply(Elt<F>::basis(sp, deg, j));
        for (auto& [q, v] : y.comp)
          for (int r = 0; r < (int)v.size(); ++r)
            if (!field_traits<F>::is_zero(v[r]) && weight_of(q, r) != weight_of(deg, j))
              throw std::invalid_argument("harmonic_contraction: d not weight homogeneous");
      }

  struct ClassData {
    std::vector<std::vector<F>> harmonic;       // dense vectors in V_deg
    std::vector<std::vector<F>> image;          // basis of im d from below
    std::vector<std::vector<F>> preimage;       // preimage[j] in V_{deg-1}, d(preimage[j]) = image[j]
    std::vector<std::vector<F>> coimage;        // complement vectors (unit vectors at pivot cols)
  };
  std::map<std::pair<int, int>, ClassData> cls;

  for (int deg = 0; deg <= top; ++deg) {
    for (auto& [key, idx] : members) {
      if (key.first != deg) continue;
      int w = key.second;
      ClassData& cd = cls[key];
      // matrix of d restricted to the class, rows = class of degree deg+1
      std::vector<int> out_idx;
      auto oit = members.find({deg + 1, w});
      if (oit != members.end()) out_idx = oit->second;
      Mat<F> m(out_idx.size(), std::vector<F>(idx.size(), F(0)));
      std::vector<Elt<F>> dcols;
      for (size_t cix = 0; cix < idx.size(); ++cix) {
        Elt<F> y = d.apply(Elt<F>::basis(sp, deg, idx[cix]));
        dcols.push_back(y);
        for (size_t rix = 0; rix < out_idx.size(); ++rix) m[rix][cix] = y.coeff(deg + 1, out_idx[rix]);
      }
      Mat<F> red = m;
      std::vector<int> pivots = detail::rref(red);
      std::vector<bool> is_pivot(idx.size(), false);
      for (int pc : pivots) is_pivot[pc] = true;
      // coimage: unit vectors at pivot columns; their images feed the next degree
      ClassData& up = cls[{deg + 1, w}];
      for (int pc : pivots) {
        std::vector<F> e(sp->dim(deg), F(0));
        e[idx[pc]] = F(1);
        cd.coimage.push_back(e);
        std::vector<F> img(sp->dim(deg + 1), F(0));
        for (auto& [q, v] : dcols[pc].comp)
          if (q == deg + 1)
            for (int r = 0; r < (int)v.size(); ++r) img[r] = v[r];
        up.image.push_back(std::move(img));
        up.preimage.push_back(e);
      }
      // kernel basis from the reduced matrix (free columns)
      std::vector<std::vector<F>> kernel;
      for (size_t f = 0; f < idx.size(); ++f) {
        if (is_pivot[f]) continue;
        std::vector<F> k(sp->dim(deg), F(0));
        k[idx[f]] = F(1);
        for (size_t prow = 0; prow < pivots.size(); ++prow)
          k[idx[pivots[prow]]] = -red[prow][f];
        kernel.push_back(std::move(k));
      }
      // harmonic representatives: kernel vectors independent of the image
      detail::IndependentSet<F> ind;
      for (auto& b : cd.image) ind.insert(b);
      for (auto& k : kernel)
        if (ind.insert(k)) cd.harmonic.push_back(k);
    }
  }

  // assemble the small space and the maps
  auto small = std::make_shared<GradedSpace>(std::vector<int>(top + 1, 0));
  small->labels.resize(top + 1);
  std::map<std::pair<int, int>, int> small_base;  // class -> first small index
  std::map<int, std::vector<int>> small_weights;
  for (auto& [key, cd] : cls) {
    auto [deg, w] = key;
    if (deg > top || cd.harmonic.empty()) continue;
    small_base[key] = small->dims[deg];
    for (size_t h = 0; h < cd.harmonic.size(); ++h) {
      small->labels[deg].push_back("h(" + std::to_string(deg) + "," +
                                   std::to_string(small->dims[deg]) + ")");
      small->dims[deg]++;
      small_weights[deg].push_back(w);
    }
  }

  Contraction<F> c;
  c.big = sp;
  c.small = small;
  c.d1 = d;
  c.d2 = LinMap<F>(small, small, 1);
  c.p = LinMap<F>(sp, small, 0);
  c.i = LinMap<F>(small, sp, 0);
  c.H = LinMap<F>(sp, sp, -1);
  c.small_weights = small_weights;

  for (auto& [key, cd] : cls) {
    auto [deg, w] = key;
    if (deg > top) continue;
    int nb = (int)cd.image.size(), nh = (int)cd.harmonic.size(), nc = (int)cd.coimage.size();
    if (nb + nh + nc == 0) continue;
    // i
    for (int h = 0; h < nh; ++h) {
      int sj = small_base[key] + h;
      for (int r = 0; r < sp->dim(deg); ++r)
        if (!field_traits<F>::is_zero(cd.harmonic[h][r])) c.i.at(deg, r, sj) = cd.harmonic[h][r];
    }
    // decompose each class basis vector in the image/harmonic/coimage basis
    int n = sp->dim(deg);
    Mat<F> basis(n, std::vector<F>(nb + nh + nc, F(0)));
    for (int j = 0; j < nb; ++j)
      for (int r = 0; r < n; ++r) basis[r][j] = cd.image[j][r];
    for (int j = 0; j < nh; ++j)
      for (int r = 0; r < n; ++r) basis[r][nb + j] = cd.harmonic[j][r];
    for (int j = 0; j < nc; ++j)
      for (int r = 0; r < n; ++r) basis[r][nb + nh + j] = cd.coimage[j][r];
    for (int member : members[{deg, w}]) {
      std::vector<F> rhs(n, F(0));
      rhs[member] = F(1);
      auto z = solve_linear(basis, rhs);
      if (!z) throw std::logic_error("harmonic_contraction: decomposition failed");
      for (int h = 0; h < nh; ++h)
        if (!field_traits<F>::is_zero((*z)[nb + h]))
          c.p.at(deg, small_base[key] + h, member) = (*z)[nb + h];
      // H sends the image part back to -preimage one degree down
      for (int b = 0; b < nb; ++b) {
        if (field_traits<F>::is_zero((*z)[b])) continue;
        for (int r = 0; r < sp->dim(deg - 1); ++r)
          if (!field_traits<F>::is_zero(cd.preimage[b][r]))
            c.H.at(deg, r, member) += -(*z)[b] * cd.preimage[b][r];
      }
    }
  }
  c.p.prune();
  c.i.prune();
  c.H.prune();
  return c;
}

// --- Perturbation lemma, chain level ---------------------------------------

template <class F>
struct Perturbed {
  LinMap<F> delta2;
  Contraction<F> c;  // contraction between the perturbed complexes
  int terms = 0;     // terms of the geometric series actually used
};

// Sigma = (1 - delta1 H)^{-1} delta1, expanded as a geometric series; in
// exact mode the series must terminate within series_cap (nilpotency).
template <class F>
Perturbed<F> perturb_contraction(const Contraction<F>& c, const LinMap<F>& delta1,
                                 int series_cap) {
  LinMap<F> dtot = c.d1 + delta1;
  if (field_traits<F>::exact && !dtot.compose(dtot).is_zero())
    throw std::invalid_argument("perturb_contraction: delta1 is not a perturbation");
  LinMap<F> term = delta1;
  LinMap<F> sigma = delta1;
  int k = 0;
  while (!term.is_zero()) {
    if (++k > series_cap) {
      if (field_traits<F>::exact)
        throw std::runtime_error("perturb_contraction: series did not terminate");
      break;
    }
    term = delta1.compose(c.H.compose(term));
    sigma += term;
  }
  Perturbed<F> out;
  out.terms = k;
  out.delta2 = c.p.compose(sigma.compose(c.i));
  out.delta2.prune();
  out.c.big = c.big;
  out.c.small = c.small;
  out.c.small_weights = c.small_weights;
  out.c.d1 = dtot;
  out.c.d2 = c.d2 + out.delta2;
  out.c.i = c.i + c.H.compose(sigma.compose(c.i));
  out.c.p = c.p + c.p.compose(sigma.compose(c.H));
  out.c.H = c.H + c.H.compose(sigma.compose(c.H));
  out.c.i.prune();
  out.c.p.prune();
  out.c.H.prune();
  return out;
}

// --- Tensor coalgebra machinery --------------------------------------------

// Words over the basis of a graded space, flattened as (deg, idx) pairs.
// A letter of degree d sits in suspension degree d - 1; all Koszul signs
// below are taken with respect to suspension parity d + 1 (mod 2).
using TWord = std::vector<int>;
template <class F>
using TElt = std::map<TWord, F>;

template <class F, class C>
void t_add_term(TElt<F>& x, const TWord& w, const C& coeff) {
  F c(coeff);  // collapse expression templates (boost rationals)
  auto it = x.find(w);
  if (it == x.end()) {
    if (!field_traits<F>::is_zero(c)) x.emplace(w, std::move(c));
    return;
  }
  it->second += c;
  if (field_traits<F>::is_zero(it->second)) x.erase(it);
}

// Linear map on the tensor coalgebra, given per basis word, with memoization.
template <class F>
struct TMap {
  std::function<TElt<F>(const TWord&)> fn;
  std::shared_ptr<std::map<TWord, TElt<F>>> memo =
      std::make_shared<std::map<TWord, TElt<F>>>();

  const TElt<F>& word(const TWord& w) const {
    auto it = memo->find(w);
    if (it != memo->end()) return it->second;
    return memo->emplace(w, fn(w)).first->second;
  }
  TElt<F> apply(const TElt<F>& x) const {
    TElt<F> out;
    for (auto& [w, cc] : x)
      for (auto& [w2, c2] : word(w)) t_add_term(out, w2, cc * c2);
    return out;
  }
};

template <class F>
TMap<F> t_compose(const TMap<F>& a, const TMap<F>& b) {
  TMap<F> m;
  m.fn = [a, b](const TWord& w) { return a.apply(b.word(w)); };
  return m;
}

template <class F>
TMap<F> t_add(const TMap<F>& a, const TMap<F>& b) {
  TMap<F> m;
  m.fn = [a, b](const TWord& w) {
    TElt<F> out = a.word(w);
    for (auto& [w2, c] : b.word(w)) t_add_term(out, w2, c);
    return out;
  };
  return m;
}

// Entrywise lift of a degree 0 chain map (T(p) and T(i) of the tensor trick).
template <class F>
TMap<F> t_lift_map(const LinMap<F>& f) {
  TMap<F> m;
  m.fn = [f](const TWord& w) {
    TElt<F> acc;
    acc[{}] = F(1);
    for (size_t li = 0; li + 1 < w.size(); li += 2) {
      Elt<F> y = f.apply(Elt<F>::basis(f.src, w[li], w[li + 1]));
      TElt<F> next;
      for (auto& [pre, c] : acc)
        for (auto& [q, v] : y.comp)
          for (int jj = 0; jj < (int)v.size(); ++jj) {
            if (field_traits<F>::is_zero(v[jj])) continue;
            TWord w2 = pre;
            w2.push_back(q);
            w2.push_back(jj);
            t_add_term(next, w2, c * v[jj]);
          }
      acc = std::move(next);
      if (acc.empty()) break;
    }
    return acc;
  };
  return m;
}

// Tensor-trick homotopy (T(H))_n = sum 1^k (x) H (x) (ip)^j, with the Koszul
// sign of the odd map H passing the first k letters.
template <class F>
TMap<F> t_homotopy(const Contraction<F>& c) {
  TMap<F> m;
  LinMap<F> ip = c.i.compose(c.p);
  m.fn = [c, ip](const TWord& w) {
    TElt<F> out;
    int n = (int)w.size() / 2;
    int prefix = 0;  // suspension parity of the first k letters
    for (int k = 0; k < n; ++k) {
      Elt<F> hy = c.H.apply(Elt<F>::basis(c.big, w[2 * k], w[2 * k + 1]));
      if (!hy.is_zero()) {
        int sign = (prefix & 1) ? -1 : 1;
        TElt<F> acc;
        TWord pre(w.begin(), w.begin() + 2 * k);
        for (auto& [q, v] : hy.comp)
          for (int jj = 0; jj < (int)v.size(); ++jj) {
            if (field_traits<F>::is_zero(v[jj])) continue;
            TWord w2 = pre;
            w2.push_back(q);
            w2.push_back(jj);
            acc[w2] = (sign < 0 ? F(-1) : F(1)) * v[jj];
          }
        for (int t = k + 1; t < n && !acc.empty(); ++t) {
          Elt<F> y = ip.apply(Elt<F>::basis(c.big, w[2 * t], w[2 * t + 1]));
          TElt<F> next;
          for (auto& [pre2, cc] : acc)
            for (auto& [q, v] : y.comp)
              for (int jj = 0; jj < (int)v.size(); ++jj) {
                if (field_traits<F>::is_zero(v[jj])) continue;
                TWord w2 = pre2;
                w2.push_back(q);
                w2.push_back(jj);
                t_add_term(next, w2, cc * v[jj]);
              }
          acc = std::move(next);
        }
        for (auto& [w2, cc] : acc) t_add_term(out, w2, cc);
      }
      prefix += w[2 * k] + 1;
    }
    return out;
  };
  return m;
}

// Bar coderivation of a curved A-infinity family on T(sV): the summand of
// arity s acting at position r carries the sign
//   (-1)^{sum_{j<r}(d_j+1) + sum_{i=1..s}(s-i)(d_{r+i}+1)},
// the first factor from the odd coderivation passing the prefix, the second
// from the desuspensions inside b_s = s m_s (s^{-1})^{(x)s}.  With this
// convention D^2 = 0 is equivalent to the Stasheff identities as implemented
// in stasheff_residual.  Insertions (s = 0) beyond len_cap letters are
// dropped; all other summands preserve or shorten words.
template <class F>
TMap<F> bar_coderivation(const AInf<F>& S, int len_cap) {
  TMap<F> m;
  m.fn = [S, len_cap](const TWord& w) {
    TElt<F> out;
    int n = (int)w.size() / 2;
    for (int s = 0; s <= S.arity_cap(); ++s) {
      const MultiOp<F>* ms = S.op(s);
      if (!ms) continue;
      for (int r = 0; r + s <= n; ++r) {
        if (s == 0 && n + 1 > len_cap) continue;
        int e = 0;
        for (int j = 0; j < r; ++j) e += w[2 * j] + 1;
        std::vector<Elt<F>> args;
        for (int i2 = 1; i2 <= s; ++i2) {
          e += (s - i2) * (w[2 * (r + i2 - 1)] + 1);
          args.push_back(Elt<F>::basis(S.sp, w[2 * (r + i2 - 1)], w[2 * (r + i2 - 1) + 1]));
        }
        Elt<F> y = ms->apply(args);
        if (y.is_zero()) continue;
        F sign = (e & 1) ? F(-1) : F(1);
        TWord pre(w.begin(), w.begin() + 2 * r);
        TWord suf(w.begin() + 2 * (r + s), w.end());
        for (auto& [q, v] : y.comp)
          for (int jj = 0; jj < (int)v.size(); ++jj) {
            if (field_traits<F>::is_zero(v[jj])) continue;
            TWord w2 = pre;
            w2.push_back(q);
            w2.push_back(jj);
            w2.insert(w2.end(), suf.begin(), suf.end());
            t_add_term(out, w2, sign * v[jj]);
          }
      }
    }
    return out;
  };
  return m;
}

// Geometric series sum_k (delta T(H))^k delta, per word, with termination.
template <class F>
TMap<F> t_sigma(const TMap<F>& delta, const TMap<F>& h, int series_cap) {
  TMap<F> m;
  m.fn = [delta, h, series_cap](const TWord& w) {
    TElt<F> acc = delta.word(w);
    TElt<F> cur = acc;
    int k = 0;
    while (!cur.empty()) {
      if (++k > series_cap) {
        if (field_traits<F>::exact)
          throw std::runtime_error("t_sigma: series did not terminate");
        break;
      }
      cur = delta.apply(h.apply(cur));
      for (auto& [w2, c] : cur) t_add_term(acc, w2, c);
    }
    return acc;
  };
  return m;
}

// Suspension sign for reading an arity-n component off the coalgebra level:
// m_n = (-1)^{sum_i (n-i)(d_i+1)} (corestriction of the coderivation), and
// the same sign for coalgebra morphism components.
inline int desuspension_sign(const TWord& w) {
  int n = (int)w.size() / 2, e = 0;
  for (int i = 1; i <= n; ++i) e += (n - i) * (w[2 * (i - 1)] + 1);
  return (e & 1) ? -1 : 1;
}

// Arity-n component of a coalgebra-level map: feed a word, keep the length-1
// part of the output, desuspend.
template <class F>
MultiOpPtr<F> t_component(const TMap<F>& M, GradedSpacePtr src, GradedSpacePtr dst, int n,
                          int shift) {
  return std::make_shared<LambdaOp<F>>(
      src, dst, n, shift, [M, src, dst, n](const std::vector<Elt<F>>& xs) {
        // expand the homogeneous inputs into basis words
        TElt<F> words;
        words[{}] = F(1);
        for (int j = 0; j < n; ++j) {
          TElt<F> next;
          for (auto& [pre, c] : words)
            for (auto& [q, v] : xs[j].comp)
              for (int jj = 0; jj < (int)v.size(); ++jj) {
                if (field_traits<F>::is_zero(v[jj])) continue;
                TWord w2 = pre;
                w2.push_back(q);
                w2.push_back(jj);
                next[w2] = c * v[jj];
              }
          words = std::move(next);
        }
        Elt<F> out(dst);
        for (auto& [w, c] : words) {
          F cc = c * F(desuspension_sign(w));
          for (auto& [w2, c2] : M.word(w)) {
            if (w2.size() != 2) continue;
            out.add_to(w2[0], w2[1], cc * c2);
          }
        }
        out.prune();
        return out;
      });
}

// --- Transfer of a curved dg structure -------------------------------------

// Tabulate an operator when the number of basis tuples is affordable; keep
// the lazy closure otherwise (large spaces at high arity).
template <class F>
MultiOpPtr<F> maybe_materialize(const MultiOpPtr<F>& op, long budget = 20000) {
  double tuples = 1;
  for (int j = 0; j < op->arity(); ++j) tuples *= op->source()->total_dim();
  if (tuples > (double)budget) return op;
  return materialize(*op);
}

template <class F>
struct TransferResult {
  AInf<F> B;           // transferred structure on the small space
  AInfMorphism<F> I;   // small -> deformed big
  AInfMorphism<F> P;   // deformed big -> small
  // 0-ary component of I.  The lifted inclusion sends the empty word to the
  // group-like element on this degree 1 twist, so I is a morphism into the
  // big structure deformed by it; P needs no twist since T(H) kills the unit.
  Elt<F> twist;
};

// gammahat = [gamma, .] as a linear map, degree +1.
template <class F>
LinMap<F> commutator_map(const AInf<F>& A, const Elt<F>& gamma) {
  LinMap<F> g(A.sp, A.sp, 1);
  const MultiOp<F>* m2 = A.op(2);
  if (!m2) return g;
  for (int deg = 0; deg <= A.sp->top_degree(); ++deg)
    for (int j = 0; j < A.sp->dim(deg); ++j) {
      Elt<F> x = Elt<F>::basis(A.sp, deg, j);
      Elt<F> y = m2->apply({gamma, x});
      Elt<F> xg = m2->apply({x, gamma});
      if (deg % 2 == 0) y -= xg; else y += xg;
      y.prune();
      for (auto& [q, v] : y.comp)
        for (int r = 0; r < (int)v.size(); ++r)
          if (!field_traits<F>::is_zero(v[r])) g.at(q - 1, r, j) += v[r];
    }
  g.prune();
  return g;
}

// sum_k M^k, terminating geometric series of a nilpotent chain-level map.
template <class F>
LinMap<F> geometric_series(const LinMap<F>& M, GradedSpacePtr sp, int series_cap) {
  LinMap<F> acc = LinMap<F>::identity(sp);
  LinMap<F> term = M;
  int k = 0;
  while (!term.is_zero()) {
    if (++k > series_cap) {
      if (field_traits<F>::exact)
        throw std::runtime_error("geometric_series: did not terminate");
      break;
    }
    acc += term;
    term = M.compose(term);
  }
  return acc;
}

// Perturbation-lemma path.  dg is an honest dg algebra on the big space of c
// (with c.d1 the same differential); gamma a degree 1 element.  The curved
// structure deform_curved_dg(dg, gamma) is transferred to the small complex
// by perturbing the lifted differential on the bar coalgebra and reading off
// components.  len_cap bounds word lengths (curvature insertions beyond it
// are dropped); series_cap bounds the geometric series.
template <class F>
TransferResult<F> transfer_curved_dg_pl(const AInf<F>& dg, const Elt<F>& gamma,
                                        const Contraction<F>& c, int arity_cap,
                                        int len_cap, int series_cap) {
  AInf<F> Adef = deform_curved_dg(dg, gamma);
  // delta_A = D_A - T(d_A): curvature insertions, [gamma,.], and the product
  AInf<F> fam;
  fam.sp = dg.sp;
  fam.m.resize(3);
  fam.m[0] = Adef.m[0];
  LinMap<F> gh = commutator_map(dg, gamma);
  auto gh_op = std::make_shared<LambdaOp<F>>(
      dg.sp, dg.sp, 1, 1,
      [gh](const std::vector<Elt<F>>& xs) { return gh.apply(xs[0]); });
  fam.m[1] = gh_op;
  fam.m[2] = dg.m.size() > 2 ? dg.m[2] : nullptr;
  TMap<F> delta = bar_coderivation(fam, len_cap);
  TMap<F> hT = t_homotopy(c);
  TMap<F> Tp = t_lift_map(c.p);
  TMap<F> Ti = t_lift_map(c.i);
  TMap<F> sigma = t_sigma(delta, hT, series_cap);
  TMap<F> deltaB = t_compose(Tp, t_compose(sigma, Ti));
  AInf<F> d2fam;
  d2fam.sp = c.small;
  d2fam.m.resize(2);
  d2fam.m[1] = std::make_shared<LambdaOp<F>>(
      c.small, c.small, 1, 1,
      [d2 = c.d2](const std::vector<Elt<F>>& xs) { return d2.apply(xs[0]); });
  TMap<F> DB = t_add(bar_coderivation(d2fam, len_cap), deltaB);
  TMap<F> Itld = t_add(Ti, t_compose(hT, t_compose(sigma, Ti)));
  TMap<F> Ptld = t_add(Tp, t_compose(Tp, t_compose(sigma, hT)));

  TransferResult<F> out;
  out.B.sp = c.small;
  out.B.weights = c.small_weights;
  out.B.m.resize(arity_cap + 1);
  for (int n = 0; n <= arity_cap; ++n)
    out.B.m[n] = maybe_materialize(t_component(DB, c.small, c.small, n, 2 - n));
  out.I.src = out.B;
  out.I.dst = Adef;
  out.I.comp.resize(arity_cap + 1);
  for (int n = 1; n <= arity_cap; ++n)
    out.I.comp[n] = maybe_materialize(t_component(Itld, c.small, dg.sp, n, 1 - n));
  out.P.src = Adef;
  out.P.dst = out.B;
  out.P.comp.resize(arity_cap + 1);
  for (int n = 1; n <= arity_cap; ++n)
    out.P.comp[n] = t_component(Ptld, dg.sp, c.small, n, 1 - n);
  out.twist = t_component(Itld, c.small, dg.sp, 0, 1)->apply({});
  return out;
}

namespace detail {

// Evaluate the sum over completely binary trees with n tails, with geometric
// series on every edge (root: root_op, tails: tail_op, interior: int_op) and
// m2 at the binary vertices, signed by (-1)^{l_v (s_v - 1)} per vertex.
template <class F>
Elt<F> tree_sum_apply(const MultiOp<F>* m2, const LinMap<F>& root_op,
                      const std::vector<MultiOpPtr<F>>& tail_ops, const LinMap<F>& int_op,
                      GradedSpacePtr small, GradedSpacePtr big,
                      const std::vector<Elt<F>>& xs) {
  int n = (int)xs.size();
  // child operator for a subtree: tails use tail_ops[slot], internal vertices
  // wrap the vertex value in the interior-edge series
  std::function<MultiOpPtr<F>(const Tree&, int)> child = [&](const Tree& t,
                                                             int slot) -> MultiOpPtr<F> {
    if (t.children.empty()) return tail_ops[slot];
    auto l = child(t.children[0], slot);
    auto r = child(t.children[1], slot + t.children[0].num_tails());
    int lt = t.children[0].num_tails(), st = t.children[1].num_tails();
    int sgn = ((lt * (st - 1)) & 1) ? -1 : 1;
    int tails = lt + st;
    // shift accumulates from the children so that P-trees with an H tail get
    // the right Koszul parity in apply_tensor_ops
    return std::make_shared<LambdaOp<F>>(
        small, big, tails, l->shift() + r->shift() - 1,
        [m2, l, r, sgn, int_op](const std::vector<Elt<F>>& ys) {
          std::vector<const MultiOp<F>*> ops = {l.get(), r.get()};
          auto applied = apply_tensor_ops(ops, ys);
          Elt<F> y = m2->apply(applied.outs);
          Elt<F> z = int_op.apply(y);
          if (applied.sign * sgn < 0) z *= F(-1);
          return z;
        });
  };
  Elt<F> out(root_op.dst);
  for (auto& t : enum_binary(n)) {
    if (t.children.empty()) continue;  // n = 1 handled by explicit formulas
    auto l = child(t.children[0], 0);
    auto r = child(t.children[1], t.children[0].num_tails());
    int lt = t.children[0].num_tails(), st = t.children[1].num_tails();
    int sgn = ((lt * (st - 1)) & 1) ? -1 : 1;
    std::vector<const MultiOp<F>*> ops = {l.get(), r.get()};
    auto applied = apply_tensor_ops(ops, xs);
    Elt<F> y = m2->apply(applied.outs);
    Elt<F> z = root_op.apply(y);
    if (applied.sign * sgn < 0) z *= F(-1);
    out += z;
  }
  out.prune();
  return out;
}

// Words of homogeneous elements with a coefficient, the working state for
// unrolling the side conditions I = T(i) + T(H) delta_A I and
// P = T(p) + P delta_A T(H) directly.  Each surviving history is one
// decorated tree: delta_A products are the binary vertices, curvature
// insertions the capped tails, T(H) the edge homotopies.  Words whose total
// weight exceeds the top weight of the big space are dropped: products add
// weights and H, i, p preserve them, so such words can never contribute,
// and every insertion or bracket costs weight at least one, which makes
// the expansion finite.
template <class F>
struct CurvedWordEngine {
  using Letter = std::pair<Elt<F>, int>;  // homogeneous part, degree
  struct WT {
    F coef;
    std::vector<Letter> ls;
  };

  Contraction<F> c;
  LinMap<F> gh;   // [gamma, .]
  LinMap<F> ip;   // i p
  Elt<F> curv;    // curvature of the deformed big algebra
  AInf<F> dg;     // undeformed big algebra (owns the product)
  const MultiOp<F>* m2 = nullptr;
  bool use_w = false;
  long wmax = 0;
  int series_cap = 0;

  CurvedWordEngine(const Contraction<F>& contr, const AInf<F>& alg, const LinMap<F>& ghat,
                   const Elt<F>& curvature, int cap)
      : c(contr), gh(ghat), ip(contr.i.compose(contr.p)), curv(curvature), dg(alg),
        series_cap(cap) {
    m2 = dg.op(2);
    use_w = dg.has_weights();
    if (use_w)
      for (auto& [deg, row] : dg.weights)
        for (int w : row) wmax = std::max(wmax, (long)w);
  }

  void push(std::vector<WT>& out, F coef, std::vector<Letter> ls) const {
    if (field_traits<F>::is_zero(coef)) return;
    long wsum = 0;
    for (auto& l : ls) {
      l.first.prune();
      if (l.first.is_zero()) return;
      if (use_w) wsum += dg.min_weight(l.first);
    }
    if (use_w && wsum > wmax) return;
    out.push_back({std::move(coef), std::move(ls)});
  }

  // inputs as degree-homogeneous words carrying the desuspension sign, with
  // the letters mapped through `lift` (identity when null)
  std::vector<WT> expand_inputs(const std::vector<Elt<F>>& xs, const LinMap<F>* lift) const {
    int n = (int)xs.size();
    std::vector<WT> cur;
    cur.push_back({F(1), {}});
    for (int j = 0; j < n; ++j) {
      std::vector<WT> next;
      for (auto& wt : cur)
        for (auto& [q, v] : xs[j].comp) {
          Elt<F> part(xs[j].sp);
          part.comp[q] = v;
          part.prune();
          if (part.is_zero()) continue;
          if (lift) {
            part = lift->apply(part);
            part.prune();
            if (part.is_zero()) continue;
          }
          WT w2 = wt;
          w2.ls.emplace_back(std::move(part), q);
          next.push_back(std::move(w2));
        }
      cur = std::move(next);
    }
    for (auto& wt : cur) {
      int e = 0;
      for (int i = 1; i <= n; ++i) e += (n - i) * (wt.ls[i - 1].second + 1);
      if (e & 1) wt.coef = -wt.coef;
    }
    return cur;
  }

  // T(H) = sum 1^k (x) H (x) (ip)^*, with the Koszul sign of the odd H
  // passing the prefix letters
  std::vector<WT> apply_th(const std::vector<WT>& cur) const {
    std::vector<WT> out;
    for (auto& wt : cur) {
      int l = (int)wt.ls.size();
      int pre = 0;  // suspension parity left of the H slot
      for (int k = 0; k < l; ++k) {
        Elt<F> hy = c.H.apply(wt.ls[k].first);
        hy.prune();
        if (!hy.is_zero()) {
          std::vector<Letter> hls(wt.ls.begin(), wt.ls.begin() + k);
          hls.emplace_back(std::move(hy), wt.ls[k].second - 1);
          bool dead = false;
          for (int t = k + 1; t < l; ++t) {
            Elt<F> y = ip.apply(wt.ls[t].first);
            y.prune();
            if (y.is_zero()) {
              dead = true;
              break;
            }
            hls.emplace_back(std::move(y), wt.ls[t].second);
          }
          if (!dead) {
            F cf = wt.coef;
            if (pre & 1) cf = -cf;
            push(out, std::move(cf), std::move(hls));
          }
        }
        pre += wt.ls[k].second + 1;
      }
    }
    return out;
  }

  // delta_A = curvature insertions, [gamma, .] and the product, with the
  // bar coderivation signs
  std::vector<WT> apply_delta(const std::vector<WT>& cur) const {
    std::vector<WT> out;
    bool ins = !curv.is_zero();
    for (auto& wt : cur) {
      int l = (int)wt.ls.size();
      int pfx = 0;
      for (int r = 0; r <= l; ++r) {
        F cc = wt.coef;
        if (pfx & 1) cc = -cc;
        if (ins) {
          std::vector<Letter> w2(wt.ls);
          w2.insert(w2.begin() + r, Letter{curv, 2});
          push(out, cc, std::move(w2));
        }
        if (r == l) break;
        std::vector<Letter> w3(wt.ls);
        w3[r] = Letter{gh.apply(wt.ls[r].first), wt.ls[r].second + 1};
        push(out, cc, std::move(w3));
        if (m2 && r + 1 < l) {
          std::vector<Letter> w4(wt.ls.begin(), wt.ls.begin() + r);
          w4.emplace_back(m2->apply({wt.ls[r].first, wt.ls[r + 1].first}),
                          wt.ls[r].second + wt.ls[r + 1].second);
          w4.insert(w4.end(), wt.ls.begin() + r + 2, wt.ls.end());
          F cm = cc;
          if ((wt.ls[r].second + 1) & 1) cm = -cm;
          push(out, std::move(cm), std::move(w4));
        }
        pfx += wt.ls[r].second + 1;
      }
    }
    return out;
  }

  // sum_k (T(H) delta_A)^k applied to the start words
  std::vector<WT> istar(std::vector<WT> start) const {
    std::vector<WT> acc = start;
    int iters = 0;
    while (!start.empty()) {
      if (++iters > series_cap)
        throw std::runtime_error("transfer_curved_dg_trees: series did not terminate");
      start = apply_th(apply_delta(start));
      acc.insert(acc.end(), start.begin(), start.end());
    }
    return acc;
  }

  // sum_k (delta_A T(H))^k applied to the start words
  std::vector<WT> pstar(std::vector<WT> start) const {
    std::vector<WT> acc = start;
    int iters = 0;
    while (!start.empty()) {
      if (++iters > series_cap)
        throw std::runtime_error("transfer_curved_dg_trees: series did not terminate");
      start = apply_delta(apply_th(start));
      acc.insert(acc.end(), start.begin(), start.end());
    }
    return acc;
  }

  // length-1 corestriction, letters mapped through `post` (identity if null)
  Elt<F> corestrict(const std::vector<WT>& ws, const LinMap<F>* post) const {
    Elt<F> out(post ? post->dst : c.big);
    for (auto& wt : ws)
      if (wt.ls.size() == 1) {
        Elt<F> y = post ? post->apply(wt.ls[0].first) : wt.ls[0].first;
        y *= wt.coef;
        out += y;
      }
    out.prune();
    return out;
  }
};

}  // namespace detail

// Decorated-tree path: the side conditions are unrolled on element words, so
// each surviving history is one decorated tree (products at the binary
// vertices, homotopies on the edges, curvature caps on extra tails) and the
// per-edge geometric series are evaluated on the fly.
template <class F>
TransferResult<F> transfer_curved_dg_trees(const AInf<F>& dg, const Elt<F>& gamma,
                                           const Contraction<F>& c, int arity_cap,
                                           int series_cap) {
  AInf<F> Adef = deform_curved_dg(dg, gamma);
  LinMap<F> gh = commutator_map(dg, gamma);
  auto eng = std::make_shared<detail::CurvedWordEngine<F>>(c, dg, gh, Adef.curvature(),
                                                           series_cap);

  TransferResult<F> out;
  out.B.sp = c.small;
  out.B.weights = c.small_weights;
  out.B.m.resize(arity_cap + 1);
  out.I.comp.resize(arity_cap + 1);
  out.P.comp.resize(arity_cap + 1);

  // 0-ary twist of the lifted inclusion, from the empty word
  out.twist = eng->corestrict(eng->istar(eng->expand_inputs({}, nullptr)), nullptr);

  // m_n = p [delta_A Itld]_1 (+ p d i at arity 1), I_n = [Itld]_1 with
  // Itld = sum_k (T(H) delta_A)^k T(i)
  LinMap<F> d2 = c.p.compose(c.d1.compose(c.i));
  for (int n = 0; n <= arity_cap; ++n) {
    out.B.m[n] = maybe_materialize<F>(std::make_shared<LambdaOp<F>>(
        c.small, c.small, n, 2 - n, [eng, n, d2](const std::vector<Elt<F>>& xs) {
          auto words = eng->istar(eng->expand_inputs(xs, &eng->c.i));
          Elt<F> res = eng->corestrict(eng->apply_delta(words), &eng->c.p);
          if (n == 1) res += d2.apply(xs[0]);
          res.prune();
          return res;
        }));
    if (n == 0) continue;
    out.I.comp[n] = maybe_materialize<F>(std::make_shared<LambdaOp<F>>(
        c.small, c.big, n, 1 - n, [eng](const std::vector<Elt<F>>& xs) {
          return eng->corestrict(eng->istar(eng->expand_inputs(xs, &eng->c.i)), nullptr);
        }));
    // P_n = p [sum_k (delta_A T(H))^k]_1
    out.P.comp[n] = std::make_shared<LambdaOp<F>>(
        c.big, c.small, n, 1 - n, [eng](const std::vector<Elt<F>>& xs) {
          return eng->corestrict(eng->pstar(eng->expand_inputs(xs, nullptr)), &eng->c.p);
        });
  }
  out.I.src = out.B;
  out.I.dst = Adef;
  out.P.src = Adef;
  out.P.dst = out.B;
  return out;
}

// --- Entrywise matrix contractions -----------------------------------------

// Contraction on matrix_algebra(base, l) induced entrywise from a contraction
// on the base algebra.  The small space consists of l x l matrices over the
// base small space, indexed (base_j, row, col) flattened; weights gain
// col - row as in the matrix fixture.
template <class F>
struct EntrywiseContraction {
  Contraction<F> c;
  int l = 1;
  GradedSpacePtr base_small;

  int small_index(int base_j, int row, int col) const { return (base_j * l + row) * l + col; }

  // trace of the matrix factor, landing in the base small space
  Elt<F> trace(const Elt<F>& x) const {
    Elt<F> out(base_small);
    for (auto& [p, v] : x.comp)
      for (int j = 0; j < (int)v.size(); ++j) {
        if (field_traits<F>::is_zero(v[j])) continue;
        int col = j % l, row = (j / l) % l, bj = j / (l * l);
        if (row == col) out.add_to(p, bj, v[j]);
      }
    out.prune();
    return out;
  }
};

template <class F>
EntrywiseContraction<F> matrix_contraction(const AlgFixture<F>& base, const AlgFixture<F>& mat,
                                           const Contraction<F>& cbase, int l) {
  EntrywiseContraction<F> ec;
  ec.l = l;
  ec.base_small = cbase.small;
  const int top = mat.sp->top_degree();
  auto small = std::make_shared<GradedSpace>(std::vector<int>(top + 1, 0));
  for (int p = 0; p <= top; ++p) small->dims[p] = cbase.small->dim(p) * l * l;
  Contraction<F>& c = ec.c;
  c.big = mat.sp;
  c.small = small;
  for (int p = 0; p <= top; ++p)
    for (int bj = 0; bj < cbase.small->dim(p); ++bj) {
      int w = 0;
      auto it = cbase.small_weights.find(p);
      if (it != cbase.small_weights.end() && bj < (int)it->second.size()) w = it->second[bj];
      for (int row = 0; row < l; ++row)
        for (int col = 0; col < l; ++col) {
          auto& wrow = c.small_weights[p];
          if ((int)wrow.size() < small->dims[p]) wrow.resize(small->dims[p], 0);
          wrow[ec.small_index(bj, row, col)] = w + (col - row);
        }
    }
  // reverse lookup: base (deg, idx) -> key
  std::map<std::pair<int, int>, const std::vector<int>*> brev;
  for (auto& [key, di] : base.index) brev[di] = &key;
  // base element at entry (row, col), expressed in the matrix fixture basis
  auto embed = [&](const Elt<F>& y, int row, int col) {
    Elt<F> out(mat.sp);
    for (auto& [q, v] : y.comp)
      for (int bj = 0; bj < (int)v.size(); ++bj) {
        if (field_traits<F>::is_zero(v[bj])) continue;
        std::vector<int> key = *brev.at({q, bj});
        key.push_back(-1);
        key.push_back(row);
        key.push_back(col);
        auto [qd, qj] = mat.index.at(key);
        out.add_to(qd, qj, v[bj]);
      }
    return out;
  };
  c.d1 = to_linmap(*mat.alg.op(1));
  c.d2 = LinMap<F>(small, small, 1);
  c.p = LinMap<F>(mat.sp, small, 0);
  c.i = LinMap<F>(small, mat.sp, 0);
  c.H = LinMap<F>(mat.sp, mat.sp, -1);
  for (auto& key : mat.keys) {
    auto [deg, j] = mat.index.at(key);
    int row = key[key.size() - 2], col = key.back();
    std::vector<int> bkey(key.begin(), key.end() - 3);
    auto [bdeg, bidx] = base.index.at(bkey);
    Elt<F> x = Elt<F>::basis(base.sp, bdeg, bidx);
    Elt<F> py = cbase.p.apply(x);
    for (auto& [q, v] : py.comp)
      for (int hj = 0; hj < (int)v.size(); ++hj)
        if (!field_traits<F>::is_zero(v[hj]))
          c.p.at(deg, ec.small_index(hj, row, col), j) += v[hj];
    Elt<F> hy = embed(cbase.H.apply(x), row, col);
    for (auto& [q, v] : hy.comp)
      for (int r = 0; r < (int)v.size(); ++r)
        if (!field_traits<F>::is_zero(v[r])) c.H.at(deg, r, j) += v[r];
  }
  for (int p = 0; p <= top; ++p)
    for (int bj = 0; bj < cbase.small->dim(p); ++bj) {
      Elt<F> iy = cbase.i.apply(Elt<F>::basis(cbase.small, p, bj));
      Elt<F> dy = cbase.d2.apply(Elt<F>::basis(cbase.small, p, bj));
      for (int row = 0; row < l; ++row)
        for (int col = 0; col < l; ++col) {
          int sj = ec.small_index(bj, row, col);
          Elt<F> em = embed(iy, row, col);
          for (auto& [q, v] : em.comp)
            for (int r = 0; r < (int)v.size(); ++r)
              if (!field_traits<F>::is_zero(v[r])) c.i.at(p, r, sj) += v[r];
          for (auto& [q, v] : dy.comp)
            for (int hj = 0; hj < (int)v.size(); ++hj)
              if (!field_traits<F>::is_zero(v[hj]))
                c.d2.at(p, ec.small_index(hj, row, col), sj) += v[hj];
        }
    }
  c.p.prune();
  c.i.prune();
  c.H.prune();
  c.d2.prune();
  return ec;
}

// --- Trace lemmas and strict composites ------------------------------------

// Cyclic symmetrization of the trace of m_n on even-degree probes; the trace
// is supplied by the caller (it depends on how the matrix factor is indexed).
template <class F>
CheckReport check_cyclic_trace(const AInf<F>& B, int n,
                               const std::vector<std::vector<Elt<F>>>& probe_tuples,
                               const std::function<Elt<F>(const Elt<F>&)>& trace,
                               double tol = 0.0) {
  if (n <= 1 || n % 2 == 0)
    throw std::invalid_argument("check_cyclic_trace: n must be odd and > 1");
  const MultiOp<F>* mn = B.op(n);
  if (!mn) throw std::invalid_argument("check_cyclic_trace: missing component");
  CheckReport rep;
  int ti = 0;
  for (auto& xs : probe_tuples) {
    if ((int)xs.size() != n) throw std::invalid_argument("check_cyclic_trace: tuple arity");
    for (auto& x : xs)
      if (!x.is_zero() && x.degree() % 2 != 0)
        throw std::invalid_argument("check_cyclic_trace: probe of odd degree");
    Elt<F> acc;
    bool first = true;
    for (int rot = 0; rot < n; ++rot) {
      std::vector<Elt<F>> ys;
      for (int j = 0; j < n; ++j) ys.push_back(xs[(rot + j) % n]);
      Elt<F> t = trace(mn->apply(ys));
      if (first) { acc = t; first = false; }
      else acc += t;
    }
    acc.prune();
    double r = acc.max_abs();
    bool ok = field_traits<F>::exact ? acc.is_zero() : (r <= tol);
    rep.note(ok, r, ok ? "" : "cyclic trace tuple " + std::to_string(ti));
    ++ti;
  }
  return rep;
}

// P2 psi I1 for a strict curved dg morphism psi intertwining the homotopies.
// The intertwining condition is verified exactly; the composite is strict.
template <class F>
AInfMorphism<F> strict_composite(const LinMap<F>& psi, const Contraction<F>& c1,
                                 const Contraction<F>& c2, const TransferResult<F>& r1,
                                 const TransferResult<F>& r2) {
  LinMap<F> resid = psi.compose(c1.H) - c2.H.compose(psi);
  if (!resid.is_zero())
    throw std::invalid_argument("strict_composite: psi does not intertwine the homotopies");
  AInfMorphism<F> psim;
  psim.src = r1.I.dst;
  psim.dst = r2.P.src;
  psim.comp.resize(2);
  psim.comp[1] = std::make_shared<LambdaOp<F>>(
      c1.big, c2.big, 1, 0, [psi](const std::vector<Elt<F>>& xs) { return psi.apply(xs[0]); });
  return compose_morphisms(r2.P, compose_morphisms(psim, r1.I));
}

}  // namespace cw
