#pragma once

// Pre-Chern elements, Chern-Weil triples, Chern cocycles and the Chern
// character.  The pre-Chern element CW_n is the sum of tree evaluations over
// all completely even trees of degree 2n; it generalizes the n-th power of
// the curvature and is computed either from that tree sum or from the
// root-valency recursion.  Everything here runs on even-degree elements, so
// no Koszul signs appear in the sums.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "cw/ainf.hpp"
#include "cw/trees.hpp"

namespace cw {

// Evaluate a tree against a curved structure: a leaf is the curvature m_0(),
// a valency-k vertex applies m_k to its evaluated children.
template <class F>
Elt<F> eval_tree(const AInf<F>& S, const Tree& t) {
  if (t.children.empty()) return S.curvature();
  const MultiOp<F>* mk = S.op(t.valency());
  if (!mk) return Elt<F>(S.sp);
  std::vector<Elt<F>> args;
  args.reserve(t.children.size());
  for (auto& c : t.children) args.push_back(eval_tree(S, c));
  return mk->apply(args);
}

// ordered compositions of n into exactly k positive parts
inline std::vector<std::vector<int>> compositions_exact(int n, int k) {
  std::vector<std::vector<int>> out;
  for (auto& parts : compositions(n, k))
    if ((int)parts.size() == k) out.push_back(parts);
  return out;
}

enum class PreChernPath { trees, recursion };

template <class F>
struct PreChern {
  std::vector<Elt<F>> cw;  // cw[n-1] is the degree-2n pre-Chern element
  std::string path;
};

// CW_1 = m_0; for n >= 2 the recursion groups the tree sum by root valency:
//   CW_n = sum over even k >= 2 and n_1+..+n_k = n + k/2 - 1 of
//          m_k(CW_{n_1}, .., CW_{n_k}).
// Every part satisfies n_i <= n - k/2 < n, so the recursion is well founded.
template <class F>
PreChern<F> pre_chern(const AInf<F>& S, int N, PreChernPath path = PreChernPath::recursion) {
  if (N < 1) throw std::invalid_argument("pre_chern: N must be >= 1");
  if (N >= 2 && S.arity_cap() < 2 * N - 2)
    throw std::invalid_argument("pre_chern: arity cap below 2N-2");
  PreChern<F> out;
  out.path = path == PreChernPath::trees ? "trees" : "recursion";
  for (int n = 1; n <= N; ++n) {
    Elt<F> s(S.sp);
    if (path == PreChernPath::trees) {
      for (auto& t : enum_cet(2 * n)) s += eval_tree(S, t);
    } else if (n == 1) {
      s = S.curvature();
    } else {
      for (int k = 2; k <= S.arity_cap(); k += 2) {
        const MultiOp<F>* mk = S.op(k);
        if (!mk) continue;
        for (auto& parts : compositions_exact(n + k / 2 - 1, k)) {
          std::vector<Elt<F>> args;
          args.reserve(k);
          for (int p : parts) args.push_back(out.cw[p - 1]);
          s += mk->apply(args);
        }
      }
    }
    s.prune();
    out.cw.push_back(std::move(s));
  }
  return out;
}

// The odd companion of the recursion, an abstract Bianchi identity: for each
// n <= N,
//   sum over odd k and n_1+..+n_k = n + (k-1)/2 of m_k(CW_{n_1},..,CW_{n_k})
// vanishes.  The n = 1 case is m_1(m_0) = 0.
template <class F>
CheckReport verify_odd_identity(const AInf<F>& S, int N, double tol = 0.0) {
  CheckReport rep;
  auto pc = pre_chern(S, N);
  for (int n = 1; n <= N; ++n) {
    Elt<F> s(S.sp);
    for (int k = 1; k <= S.arity_cap(); k += 2) {
      const MultiOp<F>* mk = S.op(k);
      if (!mk) continue;
      for (auto& parts : compositions_exact(n + (k - 1) / 2, k)) {
        std::vector<Elt<F>> args;
        args.reserve(k);
        for (int p : parts) args.push_back(pc.cw[p - 1]);
        s += mk->apply(args);
      }
    }
    s.prune();
    double r = s.max_abs();
    bool ok = field_traits<F>::exact ? s.is_zero() : r <= tol;
    rep.note(ok, r, "odd identity at n=" + std::to_string(n));
  }
  return rep;
}

// Curved structure A, chain complex C and a degree-0 map phi: A -> C with
//   (i)  phi(m_1 x) = d(phi x) on even-degree x, and
//   (ii) the symmetrization of phi(m_n(..)) vanishing for odd n > 1 on
//        even-degree arguments.
// The matrix-trace examples satisfy (ii) via cyclic invariance.
template <class F>
struct ChernWeilTriple {
  AInf<F> A;
  ChainComplex<F> C;
  LinMap<F> phi;
};

// (i) is checked on every even-degree basis element; (ii) on the supplied
// probe tuples (only odd sizes > 1 are used; arguments must be homogeneous
// of even degree, so no Koszul signs enter the symmetrization).
template <class F>
CheckReport verify_triple(const ChernWeilTriple<F>& T,
                          const std::vector<std::vector<Elt<F>>>& probes = {}, double tol = 0.0) {
  CheckReport rep;
  const MultiOp<F>* m1 = T.A.op(1);
  for (int p = 0; p <= T.A.sp->top_degree(); p += 2)
    for (int j = 0; j < T.A.sp->dim(p); ++j) {
      Elt<F> x = Elt<F>::basis(T.A.sp, p, j);
      Elt<F> res = m1 ? T.phi.apply(m1->apply({x})) : Elt<F>(T.C.sp);
      res -= T.C.d.apply(T.phi.apply(x));
      res.prune();
      double r = res.max_abs();
      bool ok = field_traits<F>::exact ? res.is_zero() : r <= tol;
      rep.note(ok, r, "triple (i) at degree " + std::to_string(p) + " index " + std::to_string(j));
    }
  for (auto& xs : probes) {
    int n = (int)xs.size();
    if (n <= 1 || n % 2 == 0) continue;
    for (auto& x : xs)
      if (!x.is_homogeneous() || (!x.is_zero() && x.degree() % 2 != 0))
        throw std::invalid_argument("verify_triple: probe arguments must be even homogeneous");
    const MultiOp<F>* mn = T.A.op(n);
    if (!mn) continue;
    Elt<F> s(T.C.sp);
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end());
    do {
      std::vector<Elt<F>> args;
      args.reserve(n);
      for (int i : idx) args.push_back(xs[i]);
      s += T.phi.apply(mn->apply(args));
    } while (std::next_permutation(idx.begin(), idx.end()));
    s.prune();
    double r = s.max_abs();
    bool ok = field_traits<F>::exact ? s.is_zero() : r <= tol;
    rep.note(ok, r, "triple (ii) at arity " + std::to_string(n));
  }
  return rep;
}

template <class F>
struct ChernCocycles {
  std::vector<Elt<F>> c;           // c[n-1] = phi(CW_n), degree 2n
  std::vector<double> d_residual;  // certificate |d c_n| per n
  CheckReport cert;
};

template <class F>
ChernCocycles<F> chern_cocycles(const ChernWeilTriple<F>& T, int N, double tol = 0.0,
                                PreChernPath path = PreChernPath::recursion) {
  auto pc = pre_chern(T.A, N, path);
  ChernCocycles<F> out;
  for (int n = 1; n <= N; ++n) {
    Elt<F> cn = T.phi.apply(pc.cw[n - 1]);
    cn.prune();
    Elt<F> dcn = T.C.d.apply(cn);
    dcn.prune();
    double r = dcn.max_abs();
    bool ok = field_traits<F>::exact ? dcn.is_zero() : r <= tol;
    out.cert.note(ok, r, "d C_" + std::to_string(n) + " nonzero");
    out.c.push_back(std::move(cn));
    out.d_residual.push_back(r);
  }
  return out;
}

inline long chern_denominator(int n) {
  long den = catalan(n - 1);
  for (long i = 2; i <= n; ++i) den *= i;
  return den;
}

// Ch_n = C_n / (n! c_{n-1}) with c_k the Catalan numbers; for associative
// input this reproduces phi(m_0^n)/n!.
template <class F>
std::vector<Elt<F>> chern_character(const ChernWeilTriple<F>& T, int N, double tol = 0.0,
                                    PreChernPath path = PreChernPath::recursion) {
  auto cc = chern_cocycles(T, N, tol, path);
  std::vector<Elt<F>> out;
  for (int n = 1; n <= N; ++n) {
    Elt<F> ch = std::move(cc.c[n - 1]);
    F scale = F(1);
    scale = scale / field_traits<F>::from_int(chern_denominator(n));
    ch *= scale;
    out.push_back(std::move(ch));
  }
  return out;
}

// The first two Chern classes of deformations of one ordinary structure do
// not depend on the deforming degree-1 element: the cocycles of A^{g1} and
// A^{g2} are cohomologous in C.  The base structure must be uncurved.
template <class F>
CheckReport connection_independence(const AInf<F>& A0, const ChainComplex<F>& C,
                                    const LinMap<F>& phi, const Elt<F>& g1, const Elt<F>& g2,
                                    int insertion_cap, double tol = 0.0) {
  if (!A0.curvature().is_zero())
    throw std::invalid_argument("connection_independence: base structure must be uncurved");
  ChernWeilTriple<F> T1{deform_ainf(A0, g1, insertion_cap), C, phi};
  ChernWeilTriple<F> T2{deform_ainf(A0, g2, insertion_cap), C, phi};
  auto c1 = chern_cocycles(T1, 2, tol);
  auto c2 = chern_cocycles(T2, 2, tol);
  CheckReport rep;
  rep.note(c1.cert.pass, c1.cert.max_residual, "cocycle certificate for g1");
  rep.note(c2.cert.pass, c2.cert.max_residual, "cocycle certificate for g2");
  for (int n = 1; n <= 2; ++n) {
    bool ok = cohomologous(C, c1.c[n - 1], c2.c[n - 1], tol);
    rep.note(ok, 0.0, "Ch_" + std::to_string(n) + " classes not cohomologous");
  }
  return rep;
}

// Transport a curved structure along invertible morphism data: given the
// source structure and components F_k with F_1 = identity, fill in the
// unique target operations making F a morphism.  The level-n morphism
// identity isolates m_n^B applied to F_1-images, so leaving op n unset while
// evaluating the right-hand side yields exactly the defining residual.
template <class F>
void transport_structure(AInfMorphism<F>& Fm, int arity_max) {
  Fm.dst.sp = Fm.src.sp;
  Fm.dst.m.assign(arity_max + 1, nullptr);
  // curvature: m_0^B = F_1(m_0^A)
  {
    Elt<F> c0 = Fm.op(1)->apply({Fm.src.curvature()});
    c0.prune();
    GradedSpacePtr sp = Fm.dst.sp;
    Fm.dst.m[0] = std::make_shared<LambdaOp<F>>(
        sp, sp, 0, 2, [c0](const std::vector<Elt<F>>&) { return c0; });
  }
  for (int n = 1; n <= arity_max; ++n) {
    auto op = std::make_shared<TensorOp<F>>(Fm.dst.sp, Fm.dst.sp, n, 2 - n);
    for (auto& tup : basis_tuples(*Fm.src.sp, n)) {
      std::vector<Elt<F>> xs;
      std::vector<int> key;
      for (auto& [p, j] : tup) {
        xs.push_back(Elt<F>::basis(Fm.src.sp, p, j));
        key.push_back(p);
        key.push_back(j);
      }
      Elt<F> val = morphism_lhs(Fm, n, xs) - morphism_rhs(Fm, n, xs);
      val.prune();
      for (auto& [p, v] : val.comp)
        for (int j = 0; j < (int)v.size(); ++j)
          if (!field_traits<F>::is_zero(v[j])) op->add_entry(key, j, v[j]);
    }
    Fm.dst.m[n] = op;
  }
}

// Transfer law for pre-Chern elements along a morphism whose even components
// vanish: for each n <= N,
//   CW_n^B = sum over odd q = 2k-1 and n_1+..+n_q = n + k - 1 of
//            F_q(CW_{n_1}^A, .., CW_{n_q}^A).
template <class F>
CheckReport verify_even_transfer(const AInfMorphism<F>& Fm, int N, double tol = 0.0) {
  for (int k = 2; k <= Fm.arity_cap(); k += 2)
    if (Fm.op(k))
      throw std::invalid_argument("verify_even_transfer: even morphism components must vanish");
  CheckReport rep;
  auto pa = pre_chern(Fm.src, N);
  auto pb = pre_chern(Fm.dst, N);
  for (int n = 1; n <= N; ++n) {
    Elt<F> rhs(Fm.dst.sp);
    for (int q = 1; q <= Fm.arity_cap(); q += 2) {
      const MultiOp<F>* fq = Fm.op(q);
      if (!fq) continue;
      for (auto& parts : compositions_exact(n + (q - 1) / 2, q)) {
        std::vector<Elt<F>> args;
        args.reserve(q);
        for (int p : parts) args.push_back(pa.cw[p - 1]);
        rhs += fq->apply(args);
      }
    }
    rhs.prune();
    Elt<F> res = pb.cw[n - 1] - rhs;
    res.prune();
    double r = res.max_abs();
    bool ok = field_traits<F>::exact ? res.is_zero() : r <= tol;
    rep.note(ok, r, "pre-Chern transfer law at n=" + std::to_string(n));
  }
  return rep;
}

// Naturality for a morphism of triples (A, phi_A, C_A) -> (B, phi_B, C_B)
// with even components zero and chain map f: checks the pre-Chern transfer
// law and f(C_n^A) = C_n^B for n <= N.
template <class F>
CheckReport naturality_check(const AInfMorphism<F>& Fm, const LinMap<F>& f,
                             const ChernWeilTriple<F>& TA, const ChernWeilTriple<F>& TB, int N,
                             double tol = 0.0) {
  CheckReport rep = verify_even_transfer(Fm, N, tol);
  auto pa = pre_chern(TA.A, N);
  auto pb = pre_chern(TB.A, N);
  for (int n = 1; n <= N; ++n) {
    Elt<F> res = f.apply(TA.phi.apply(pa.cw[n - 1])) - TB.phi.apply(pb.cw[n - 1]);
    res.prune();
    double r = res.max_abs();
    bool ok = field_traits<F>::exact ? res.is_zero() : r <= tol;
    rep.note(ok, r, "cocycle naturality at n=" + std::to_string(n));
  }
  return rep;
}

}  // namespace cw
