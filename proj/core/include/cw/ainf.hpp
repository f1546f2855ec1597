#pragma once

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cw/linalg.hpp"
#include "cw/multiop.hpp"
#include "cw/perm.hpp"

namespace cw {

// Multilinear operator given by a callable on homogeneous inputs; apply()
// expands inhomogeneous inputs by multilinearity first.
template <class F>
struct LambdaOp final : MultiOp<F> {
  GradedSpacePtr src, dst;
  int k, sh;
  std::function<Elt<F>(const std::vector<Elt<F>>&)> fn;

  LambdaOp(GradedSpacePtr s, GradedSpacePtr t, int arity_, int shift_,
           std::function<Elt<F>(const std::vector<Elt<F>>&)> f)
      : src(std::move(s)), dst(std::move(t)), k(arity_), sh(shift_), fn(std::move(f)) {}

  int arity() const override { return k; }
  int shift() const override { return sh; }
  GradedSpacePtr source() const override { return src; }
  GradedSpacePtr target() const override { return dst; }

  Elt<F> apply(const std::vector<Elt<F>>& xs) const override {
    if ((int)xs.size() != k) throw std::invalid_argument("LambdaOp: arity mismatch");
    // expand multilinearly into homogeneous tuples
    std::vector<std::vector<Elt<F>>> parts;
    for (auto& x : xs) {
      parts.push_back(x.homogeneous_parts());
      if (parts.back().empty()) return Elt<F>(dst);
    }
    Elt<F> out(dst);
    std::vector<int> idx(k, 0);
    while (true) {
      std::vector<Elt<F>> tup;
      for (int j = 0; j < k; ++j) tup.push_back(parts[j][idx[j]]);
      out += fn(tup);
      int j = k - 1;
      while (j >= 0 && idx[j] + 1 == (int)parts[j].size()) { idx[j] = 0; --j; }
      if (j < 0) break;
      ++idx[j];
    }
    if (k == 0) out = fn({});
    out.prune();
    return out;
  }
};

// Curved A-infinity structure: maps m_k of degree 2-k, k = 0..arity cap.
// A missing/null entry means the zero map.  The optional weight table
// (degree -> weight per basis element) certifies truncations: operators that
// strictly raise total weight are nilpotent on these finite spaces.
template <class F>
struct AInf {
  GradedSpacePtr sp;
  std::vector<MultiOpPtr<F>> m;
  std::map<int, std::vector<int>> weights;

  const MultiOp<F>* op(int k) const {
    if (k < 0 || k >= (int)m.size()) return nullptr;
    return m[k].get();
  }
  int arity_cap() const { return (int)m.size() - 1; }

  Elt<F> curvature() const {
    if (!op(0)) return Elt<F>(sp);
    return op(0)->apply({});
  }

  bool has_weights() const { return !weights.empty(); }
  // smallest weight present in the support of x (INT_MAX if zero)
  int min_weight(const Elt<F>& x) const {
    int w = INT32_MAX;
    for (auto& [p, v] : x.comp) {
      auto it = weights.find(p);
      for (int j = 0; j < (int)v.size(); ++j)
        if (!field_traits<F>::is_zero(v[j])) {
          int wj = (it == weights.end()) ? 0 : it->second[j];
          w = std::min(w, wj);
        }
    }
    return w;
  }
  // zero out the components of weight >= threshold
  Elt<F> truncate_weight(const Elt<F>& x, int threshold) const {
    Elt<F> y = x;
    for (auto& [p, v] : y.comp) {
      auto it = weights.find(p);
      for (int j = 0; j < (int)v.size(); ++j) {
        int wj = (it == weights.end()) ? 0 : it->second[j];
        if (wj >= threshold) v[j] = F(0);
      }
    }
    y.prune();
    return y;
  }
};

// One Stasheff identity, level n, evaluated on a homogeneous tuple:
//   sum_{r+s+t=n} (-1)^{rs+t} m_{r+t+1} (1^r (x) m_s (x) 1^t) (x_1..x_n),
// with the Koszul sign of m_s passing the first r arguments.  This is the
// unsuspended element-level convention: it reproduces the curved dg algebra
// identities (Bianchi, covariant-derivative square, Leibniz, associativity)
// and is preserved by the gamma-insertion deformation.
template <class F>
Elt<F> stasheff_residual(const AInf<F>& S, int n, const std::vector<Elt<F>>& xs) {
  Elt<F> res(S.sp);
  for (int r = 0; r <= n; ++r)
    for (int s = 0; r + s <= n; ++s) {
      int t = n - r - s;
      const MultiOp<F>* inner = S.op(s);
      const MultiOp<F>* outer = S.op(r + t + 1);
      if (!inner || !outer) continue;
      int degpre = 0;
      bool zero = false;
      for (int j = 0; j < r; ++j) {
        if (xs[j].is_zero()) { zero = true; break; }
        degpre += xs[j].degree();
      }
      if (zero) continue;
      // Koszul: m_s (degree 2-s) passes x_1..x_r.
      int sign = ((r * s + t) & 1) ? -1 : 1;
      if ((s & 1) && (degpre & 1)) sign = -sign;
      std::vector<Elt<F>> innerargs(xs.begin() + r, xs.begin() + r + s);
      Elt<F> mid = inner->apply(innerargs);
      if (mid.is_zero()) continue;
      std::vector<Elt<F>> outerargs(xs.begin(), xs.begin() + r);
      outerargs.push_back(mid);
      outerargs.insert(outerargs.end(), xs.begin() + r + s, xs.end());
      Elt<F> term = outer->apply(outerargs);
      if (sign < 0) term *= F(-1);
      res += term;
    }
  res.prune();
  return res;
}

struct CheckReport {
  bool pass = true;
  double max_residual = 0.0;
  std::string first_failure;

  void note(bool ok, double resid, const std::string& what) {
    max_residual = std::max(max_residual, resid);
    if (!ok && pass) { pass = false; first_failure = what; }
  }
};

// Check the Stasheff identities for n <= n_max on basis-exhaustive probe
// tuples (up to tuple_cap tuples per level; beyond that a deterministic
// subsample is used).  weight_cap >= 0 makes the check weight-filtered:
// the residual only has to vanish below (input weight + weight_cap + 1).
template <class F>
CheckReport check_stasheff(const AInf<F>& S, int n_max, int weight_cap = -1,
                           double tol = 0.0, long tuple_cap = 10000) {
  CheckReport rep;
  for (int n = 0; n <= n_max; ++n) {
    auto tuples = basis_tuples(*S.sp, n);
    long stride = ((long)tuples.size() + tuple_cap - 1) / tuple_cap;
    if (stride < 1) stride = 1;
    for (size_t ti = 0; ti < tuples.size(); ti += stride) {
      std::vector<Elt<F>> xs;
      int win = 0;
      for (auto& [p, j] : tuples[ti]) {
        xs.push_back(Elt<F>::basis(S.sp, p, j));
        if (S.has_weights()) win += S.min_weight(xs.back());
      }
      Elt<F> res = stasheff_residual(S, n, xs);
      if (weight_cap >= 0 && S.has_weights())
        res = S.truncate_weight(res, win + weight_cap + 1) - S.truncate_weight(res, win);
      double r = res.max_abs();
      bool ok = field_traits<F>::exact ? res.is_zero() : (r <= tol);
      rep.note(ok, r, ok ? "" : "stasheff n=" + std::to_string(n) + " tuple " + std::to_string(ti));
    }
  }
  return rep;
}

// --- Deformation by a degree 1 element ------------------------------------

// Insertion series m_n^g(x_1..x_n) = sum_k sum_sigma chi(sigma)
// m_{n+k}(y_{sigma(1)},...,y_{sigma(k+n)}), y_1..y_k = gamma, y_{k+j} = x_j,
// sigma running over (k, k+n)-unshuffles, truncated at k <= weight_cap.
template <class F>
Elt<F> deformed_apply(const AInf<F>& S, const Elt<F>& gamma, int n, int weight_cap,
                      const std::vector<Elt<F>>& xs) {
  Elt<F> out(S.sp);
  std::vector<int> xdeg(n);
  for (int j = 0; j < n; ++j) {
    if (xs[j].is_zero()) return out;
    xdeg[j] = xs[j].degree();
  }
  for (int k = 0; n + k <= S.arity_cap() && k <= weight_cap; ++k) {
    const MultiOp<F>* mk = S.op(n + k);
    if (!mk) continue;
    std::vector<int> ydeg(k + n, 1);
    for (int j = 0; j < n; ++j) ydeg[k + j] = xdeg[j];
    for (auto& sigma : unshuffles(k, k + n)) {
      int chi = koszul_sign(sigma, ydeg).chi();
      std::vector<Elt<F>> args;
      args.reserve(k + n);
      for (int j = 0; j < k + n; ++j) {
        int y = sigma[j];
        args.push_back(y <= k ? gamma : xs[y - k - 1]);
      }
      Elt<F> term = mk->apply(args);
      if (chi < 0) term *= F(-1);
      out += term;
    }
  }
  out.prune();
  return out;
}

template <class F>
AInf<F> deform_ainf(const AInf<F>& S, const Elt<F>& gamma, int weight_cap) {
  if (!gamma.is_zero() && gamma.degree() != 1)
    throw std::invalid_argument("deform_ainf: gamma must have degree 1");
  if (weight_cap < 0) throw std::invalid_argument("deform_ainf: negative weight cap");
  AInf<F> D;
  D.sp = S.sp;
  D.weights = S.weights;
  int cap = S.arity_cap();
  D.m.resize(cap + 1);
  for (int n = 0; n <= cap; ++n) {
    bool any = false;
    for (int k = n; k <= cap; ++k)
      if (S.op(k)) any = true;
    if (!any) continue;
    AInf<F> Scopy = S;  // shared_ptr copies only
    Elt<F> g = gamma;
    D.m[n] = std::make_shared<LambdaOp<F>>(
        S.sp, S.sp, n, 2 - n,
        [Scopy, g, n, weight_cap](const std::vector<Elt<F>>& xs) {
          return deformed_apply(Scopy, g, n, weight_cap, xs);
        });
  }
  return D;
}

// Deformation of an honest dg algebra (m_0 = 0, m_k = 0 for k > 2):
// m_0 = d(gamma) + gamma.gamma, m_1 = d + [gamma, .], m_2 unchanged.
template <class F>
AInf<F> deform_curved_dg(const AInf<F>& A, const Elt<F>& gamma) {
  if (A.op(0) && !A.curvature().is_zero())
    throw std::invalid_argument("deform_curved_dg: input already curved");
  if (A.arity_cap() > 2)
    for (int k = 3; k <= A.arity_cap(); ++k)
      if (A.op(k)) throw std::invalid_argument("deform_curved_dg: input not a dg algebra");
  if (!gamma.is_zero() && gamma.degree() != 1)
    throw std::invalid_argument("deform_curved_dg: gamma must have degree 1");
  const MultiOp<F>* d = A.op(1);
  const MultiOp<F>* mul = A.op(2);
  AInf<F> D;
  D.sp = A.sp;
  D.weights = A.weights;
  D.m.resize(3);
  Elt<F> curv(A.sp);
  if (d) curv += d->apply({gamma});
  if (mul) curv += mul->apply({gamma, gamma});
  curv.prune();
  D.m[0] = std::make_shared<LambdaOp<F>>(A.sp, A.sp, 0, 2,
                                         [curv](const std::vector<Elt<F>>&) { return curv; });
  AInf<F> Acopy = A;
  Elt<F> g = gamma;
  D.m[1] = std::make_shared<LambdaOp<F>>(
      A.sp, A.sp, 1, 1, [Acopy, g](const std::vector<Elt<F>>& xs) {
        Elt<F> out(Acopy.sp);
        if (const MultiOp<F>* d1 = Acopy.op(1)) out += d1->apply(xs);
        if (const MultiOp<F>* m2 = Acopy.op(2)) {
          out += m2->apply({g, xs[0]});
          Elt<F> xg = m2->apply({xs[0], g});
          if (xs[0].degree() % 2 == 0) out -= xg; else out += xg;
        }
        return out;
      });
  D.m[2] = A.m.size() > 2 ? A.m[2] : nullptr;
  return D;
}

// --- Morphisms -------------------------------------------------------------

template <class F>
struct AInfMorphism {
  AInf<F> src, dst;
  std::vector<MultiOpPtr<F>> comp;  // comp[k]: arity k, degree 1-k; comp[0] unused

  const MultiOp<F>* op(int k) const {
    if (k < 1 || k >= (int)comp.size()) return nullptr;
    return comp[k].get();
  }
  int arity_cap() const { return (int)comp.size() - 1; }
  bool is_strict() const {
    for (int k = 2; k <= arity_cap(); ++k)
      if (op(k)) return false;  // entry present; caller may still materialize-check
    return true;
  }

  static AInfMorphism identity(const AInf<F>& S) {
    AInfMorphism f;
    f.src = S;
    f.dst = S;
    f.comp.resize(2);
    f.comp[1] = std::make_shared<LambdaOp<F>>(S.sp, S.sp, 1, 0,
                                              [](const std::vector<Elt<F>>& xs) { return xs[0]; });
    return f;
  }
};

// w = sum_{l=1}^{q-1} (q - l)(i_l - 1)
inline int composition_sign(const std::vector<int>& parts) {
  int q = (int)parts.size(), w = 0;
  for (int l = 1; l <= q - 1; ++l) w += (q - l) * (parts[l - 1] - 1);
  return (w & 1) ? -1 : 1;
}

inline void compositions_rec(int n, int maxparts, std::vector<int>& cur,
                             std::vector<std::vector<int>>& out) {
  if (n == 0) {
    if (!cur.empty()) out.push_back(cur);
    return;
  }
  if ((int)cur.size() == maxparts) return;
  for (int i = 1; i <= n; ++i) {
    cur.push_back(i);
    compositions_rec(n - i, maxparts, cur, out);
    cur.pop_back();
  }
}

// ordered compositions of n into at most maxparts positive parts
inline std::vector<std::vector<int>> compositions(int n, int maxparts) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  compositions_rec(n, maxparts, cur, out);
  return out;
}

// sum over q, i_1+..+i_q = n of (-1)^w m_q(F_{i_1} (x) ... (x) F_{i_q})
template <class F>
Elt<F> morphism_rhs(const AInfMorphism<F>& Fm, int n, const std::vector<Elt<F>>& xs) {
  Elt<F> out(Fm.dst.sp);
  for (auto& parts : compositions(n, n)) {
    int q = (int)parts.size();
    const MultiOp<F>* mq = Fm.dst.op(q);
    if (!mq) continue;
    std::vector<const MultiOp<F>*> ops;
    bool missing = false;
    for (int i : parts) {
      const MultiOp<F>* fi = Fm.op(i);
      if (!fi) { missing = true; break; }
      ops.push_back(fi);
    }
    if (missing) continue;
    auto applied = apply_tensor_ops(ops, xs);
    Elt<F> term = mq->apply(applied.outs);
    int sign = composition_sign(parts) * applied.sign;
    if (sign < 0) term *= F(-1);
    out += term;
  }
  out.prune();
  return out;
}

// sum_{r+s+t=n} (-1)^{rs+t} F_{r+t+1}(1^r (x) m_s (x) 1^t), same element-level
// convention as stasheff_residual
template <class F>
Elt<F> morphism_lhs(const AInfMorphism<F>& Fm, int n, const std::vector<Elt<F>>& xs) {
  Elt<F> out(Fm.dst.sp);
  for (int r = 0; r <= n; ++r)
    for (int s = 0; r + s <= n; ++s) {
      int t = n - r - s;
      const MultiOp<F>* inner = Fm.src.op(s);
      const MultiOp<F>* outer = Fm.op(r + t + 1);
      if (!inner || !outer) continue;
      int degpre = 0;
      bool zero = false;
      for (int j = 0; j < r; ++j) {
        if (xs[j].is_zero()) { zero = true; break; }
        degpre += xs[j].degree();
      }
      if (zero) continue;
      int sign = ((r * s + t) & 1) ? -1 : 1;
      if ((s & 1) && (degpre & 1)) sign = -sign;
      std::vector<Elt<F>> innerargs(xs.begin() + r, xs.begin() + r + s);
      Elt<F> mid = inner->apply(innerargs);
      if (mid.is_zero()) continue;
      std::vector<Elt<F>> outerargs(xs.begin(), xs.begin() + r);
      outerargs.push_back(mid);
      outerargs.insert(outerargs.end(), xs.begin() + r + s, xs.end());
      Elt<F> term = outer->apply(outerargs);
      if (sign < 0) term *= F(-1);
      out += term;
    }
  out.prune();
  return out;
}

template <class F>
CheckReport verify_morphism(const AInfMorphism<F>& Fm, int n_max, int weight_cap = -1,
                            double tol = 0.0, long tuple_cap = 10000) {
  CheckReport rep;
  // curvature condition F_1 m_0 = m_0'
  {
    Elt<F> lhs = Fm.op(1) ? Fm.op(1)->apply({Fm.src.curvature()}) : Elt<F>(Fm.dst.sp);
    Elt<F> res = lhs - Fm.dst.curvature();
    res.prune();
    if (weight_cap >= 0 && Fm.dst.has_weights())
      res = Fm.dst.truncate_weight(res, weight_cap + 1);
    double r = res.max_abs();
    bool ok = field_traits<F>::exact ? res.is_zero() : (r <= tol);
    rep.note(ok, r, "morphism curvature condition");
  }
  for (int n = 1; n <= n_max; ++n) {
    auto tuples = basis_tuples(*Fm.src.sp, n);
    long stride = ((long)tuples.size() + tuple_cap - 1) / tuple_cap;
    if (stride < 1) stride = 1;
    for (size_t ti = 0; ti < tuples.size(); ti += stride) {
      std::vector<Elt<F>> xs;
      int win = 0;
      for (auto& [p, j] : tuples[ti]) {
        xs.push_back(Elt<F>::basis(Fm.src.sp, p, j));
        if (Fm.src.has_weights()) win += Fm.src.min_weight(xs.back());
      }
      Elt<F> res = morphism_lhs(Fm, n, xs) - morphism_rhs(Fm, n, xs);
      res.prune();
      if (weight_cap >= 0 && Fm.dst.has_weights())
        res = Fm.dst.truncate_weight(res, win + weight_cap + 1) - Fm.dst.truncate_weight(res, win);
      double r = res.max_abs();
      bool ok = field_traits<F>::exact ? res.is_zero() : (r <= tol);
      rep.note(ok, r, ok ? "" : "morphism n=" + std::to_string(n) + " tuple " + std::to_string(ti));
    }
  }
  return rep;
}

template <class F>
AInfMorphism<F> compose_morphisms(const AInfMorphism<F>& G, const AInfMorphism<F>& Fm) {
  if (!(*Fm.dst.sp == *G.src.sp))
    throw std::invalid_argument("compose_morphisms: structure mismatch");
  AInfMorphism<F> H;
  H.src = Fm.src;
  H.dst = G.dst;
  int cap = Fm.arity_cap() * std::max(1, G.arity_cap());
  H.comp.resize(cap + 1);
  for (int p = 1; p <= cap; ++p) {
    AInfMorphism<F> Gc = G, Fc = Fm;
    H.comp[p] = std::make_shared<LambdaOp<F>>(
        Fm.src.sp, G.dst.sp, p, 1 - p, [Gc, Fc, p](const std::vector<Elt<F>>& xs) {
          Elt<F> out(Gc.dst.sp);
          for (auto& parts : compositions(p, p)) {
            int q = (int)parts.size();
            const MultiOp<F>* gq = Gc.op(q);
            if (!gq) continue;
            std::vector<const MultiOp<F>*> ops;
            bool missing = false;
            for (int i : parts) {
              const MultiOp<F>* fi = Fc.op(i);
              if (!fi) { missing = true; break; }
              ops.push_back(fi);
            }
            if (missing) continue;
            auto applied = apply_tensor_ops(ops, xs);
            Elt<F> term = gq->apply(applied.outs);
            int sign = composition_sign(parts) * applied.sign;
            if (sign < 0) term *= F(-1);
            out += term;
          }
          return out;
        });
  }
  return H;
}

// Deformed morphism components, Eq. (ainfmorph) style insertion series.
template <class F>
AInfMorphism<F> deform_morphism(const AInfMorphism<F>& Fm, const Elt<F>& gamma, int weight_cap) {
  if (!gamma.is_zero() && gamma.degree() != 1)
    throw std::invalid_argument("deform_morphism: gamma must have degree 1");
  Elt<F> gprime(Fm.dst.sp);
  for (int k = 1; k <= Fm.arity_cap() && k <= weight_cap; ++k) {
    const MultiOp<F>* fk = Fm.op(k);
    if (!fk) continue;
    gprime += fk->apply(std::vector<Elt<F>>(k, gamma));
  }
  gprime.prune();
  AInfMorphism<F> D;
  D.src = deform_ainf(Fm.src, gamma, weight_cap);
  D.dst = deform_ainf(Fm.dst, gprime, weight_cap);
  D.comp.resize(Fm.comp.size());
  for (int n = 1; n <= Fm.arity_cap(); ++n) {
    AInfMorphism<F> Fc = Fm;
    Elt<F> g = gamma;
    D.comp[n] = std::make_shared<LambdaOp<F>>(
        Fm.src.sp, Fm.dst.sp, n, 1 - n, [Fc, g, n, weight_cap](const std::vector<Elt<F>>& xs) {
          Elt<F> out(Fc.dst.sp);
          std::vector<int> xdeg(n);
          for (int j = 0; j < n; ++j) {
            if (xs[j].is_zero()) return out;
            xdeg[j] = xs[j].degree();
          }
          for (int k = 0; n + k <= Fc.arity_cap() && k <= weight_cap; ++k) {
            const MultiOp<F>* fk = Fc.op(n + k);
            if (!fk) continue;
            std::vector<int> ydeg(k + n, 1);
            for (int j = 0; j < n; ++j) ydeg[k + j] = xdeg[j];
            for (auto& sigma : unshuffles(k, k + n)) {
              int chi = koszul_sign(sigma, ydeg).chi();
              std::vector<Elt<F>> args;
              for (int j = 0; j < k + n; ++j) {
                int y = sigma[j];
                args.push_back(y <= k ? g : xs[y - k - 1]);
              }
              Elt<F> term = fk->apply(args);
              if (chi < 0) term *= F(-1);
              out += term;
            }
          }
          return out;
        });
  }
  return D;
}

// --- Small chain complexes and cohomology ----------------------------------

template <class F>
struct ChainComplex {
  GradedSpacePtr sp;
  LinMap<F> d;  // degree +1

  bool d_squared_zero() const { return d.compose(d).is_zero(); }
};

template <class F>
bool is_cocycle(const ChainComplex<F>& C, const Elt<F>& x, double tol = 0.0) {
  Elt<F> dx = C.d.apply(x);
  return field_traits<F>::exact ? dx.is_zero() : dx.max_abs() <= tol;
}

// Decide whether two cocycles of (homogeneous) degree p are cohomologous,
// i.e. x - y in image of d from degree p-1.
template <class F>
bool cohomologous(const ChainComplex<F>& C, const Elt<F>& x, const Elt<F>& y, double tol = 0.0) {
  if (!is_cocycle(C, x, tol) || !is_cocycle(C, y, tol))
    throw std::invalid_argument("cohomologous: input is not a cocycle");
  Elt<F> diff = x - y;
  diff.prune();
  if (diff.is_zero()) return true;
  int p = diff.degree();
  int np = C.sp->dim(p), nprev = C.sp->dim(p - 1);
  Mat<F> a(np, std::vector<F>(nprev, F(0)));
  auto it = C.d.mat.find(p - 1);
  if (it != C.d.mat.end())
    for (int r = 0; r < np; ++r)
      for (int c = 0; c < nprev; ++c) a[r][c] = it->second[r][c];
  std::vector<F> b(np, F(0));
  for (int r = 0; r < np; ++r) b[r] = diff.coeff(p, r);
  return solve_linear(a, b, tol).has_value();
}

}  // namespace cw
