#pragma once

// Discrete pipeline: interpolate a smooth projector family over a
// triangulated surface, push the resulting connection form through the
// Dupont contraction onto simplicial cochains, deform by the connection
// cochain and pair the trace of the curvature with the fundamental cycle.
// Per-vertex-star operator bounds certify the homotopy series.

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cw/ainf.hpp"
#include "cw/oracle.hpp"
#include "cw/piecewise.hpp"
#include "cw/simplicial.hpp"

namespace cw {

namespace detail {

// The side-condition unrolling of transfer_curved_dg_trees, specialised to
// the Dupont contraction (W, R, H) on matrix-valued piecewise forms.  The
// big algebra is an honest flat dg algebra (d = exterior derivative,
// product = wedge), so delta is the product alone and every delta shortens
// the word: the series terminates structurally.
template <class CoordF>
struct PiecewiseEngine {
  using PF = PiecewiseForm<CF, CoordF>;
  struct Letter {
    std::shared_ptr<const PF> w;
    int deg;
  };
  struct WT {
    CF coef;
    std::vector<Letter> ls;
  };

  const SimplicialComplex<CoordF>* X;
  GradedSpacePtr sp;
  FaceOwners<CoordF> own;
  int l;
  int series_cap;

  PiecewiseEngine(const SimplicialComplex<CoordF>& mesh, GradedSpacePtr space, int rank,
                  int cap)
      : X(&mesh), sp(space), own(mesh), l(rank), series_cap(cap) {}

  std::shared_ptr<const PF> lift(const Elt<CF>& c) const {
    return std::make_shared<PF>(whitney(*X, c, l));
  }
  Elt<CF> project(const PF& w) const { return de_rham(*X, w, sp, own); }
  std::shared_ptr<const PF> ip(const PF& w) const { return lift(project(w)); }

  // inputs as degree-homogeneous words of Whitney forms, with the
  // desuspension sign
  std::vector<WT> expand_inputs(const std::vector<Elt<CF>>& xs) const {
    int n = (int)xs.size();
    std::vector<WT> cur;
    cur.push_back({CF(1), {}});
    for (int j = 0; j < n; ++j) {
      std::vector<WT> next;
      for (auto& wt : cur)
        for (auto& [q, v] : xs[j].comp) {
          Elt<CF> part(xs[j].sp);
          part.comp[q] = v;
          part.prune();
          if (part.is_zero()) continue;
          auto pw = lift(part);
          if (pw->is_zero()) continue;
          WT w2 = wt;
          w2.ls.push_back({std::move(pw), q});
          next.push_back(std::move(w2));
        }
      cur = std::move(next);
    }
    for (auto& wt : cur) {
      int e = 0;
      for (int i = 1; i <= n; ++i) e += (n - i) * (wt.ls[i - 1].deg + 1);
      if (e & 1) wt.coef = -wt.coef;
    }
    return cur;
  }

  // T(H) = sum 1^k (x) H (x) (WR)^*, with the Koszul sign of the odd H
  // passing the prefix letters
  std::vector<WT> apply_th(const std::vector<WT>& cur) const {
    std::vector<WT> out;
    for (auto& wt : cur) {
      int n = (int)wt.ls.size();
      int pre = 0;
      for (int k = 0; k < n; ++k) {
        if (wt.ls[k].deg > 0) {
          auto hy = std::make_shared<PF>(dupont_h(*wt.ls[k].w));
          if (!hy->is_zero()) {
            std::vector<Letter> hls(wt.ls.begin(), wt.ls.begin() + k);
            hls.push_back({std::move(hy), wt.ls[k].deg - 1});
            bool dead = false;
            for (int t = k + 1; t < n; ++t) {
              auto y = ip(*wt.ls[t].w);
              if (y->is_zero()) {
                dead = true;
                break;
              }
              hls.push_back({std::move(y), wt.ls[t].deg});
            }
            if (!dead) {
              CF cf = wt.coef;
              if (pre & 1) cf = -cf;
              out.push_back({cf, std::move(hls)});
            }
          }
        }
        pre += wt.ls[k].deg + 1;
      }
    }
    return out;
  }

  // delta = the wedge product on adjacent letters, with the bar coderivation
  // signs (no curvature, no bracket: the big algebra is flat)
  std::vector<WT> apply_delta(const std::vector<WT>& cur) const {
    std::vector<WT> out;
    for (auto& wt : cur) {
      int n = (int)wt.ls.size();
      int pfx = 0;
      for (int r = 0; r + 1 < n; ++r) {
        auto prod = std::make_shared<PF>(wedge(*wt.ls[r].w, *wt.ls[r + 1].w));
        if (!prod->is_zero()) {
          std::vector<Letter> w2(wt.ls.begin(), wt.ls.begin() + r);
          w2.push_back({std::move(prod), wt.ls[r].deg + wt.ls[r + 1].deg});
          w2.insert(w2.end(), wt.ls.begin() + r + 2, wt.ls.end());
          CF cm = wt.coef;
          if ((pfx + wt.ls[r].deg + 1) & 1) cm = -cm;
          out.push_back({std::move(cm), std::move(w2)});
        }
        pfx += wt.ls[r].deg + 1;
      }
    }
    return out;
  }

  // sum_k (T(H) delta)^k; each delta shortens the word, so this is finite
  std::vector<WT> istar(std::vector<WT> start) const {
    std::vector<WT> acc = start;
    int iters = 0;
    while (!start.empty()) {
      if (++iters > series_cap)
        throw std::runtime_error("cochain transfer: series did not terminate");
      start = apply_th(apply_delta(start));
      acc.insert(acc.end(), start.begin(), start.end());
    }
    return acc;
  }

  Elt<CF> corestrict(const std::vector<WT>& ws) const {
    Elt<CF> out(sp);
    for (auto& wt : ws)
      if (wt.ls.size() == 1) {
        Elt<CF> y = project(*wt.ls[0].w);
        y *= wt.coef;
        out += y;
      }
    out.prune();
    return out;
  }
};

}  // namespace detail

// Flat A-infinity structure on the matrix-valued simplicial cochains,
// transferred from the wedge algebra of piecewise forms: m_1 is the
// simplicial coboundary, m_2 the cup product via Whitney forms, the higher
// operations the Dupont homotopy corrections.
struct CochainAlgebra {
  GradedSpacePtr sp;
  AInf<CF> B;
};

template <class CoordF>
CochainAlgebra build_cochain_ainf(const SimplicialComplex<CoordF>& X, int l, int arity_cap,
                                  int series_cap = 64) {
  CochainAlgebra out;
  out.sp = cochain_space(X, l);
  auto eng = std::make_shared<detail::PiecewiseEngine<CoordF>>(X, out.sp, l, series_cap);
  out.B.sp = out.sp;
  out.B.m.resize(arity_cap + 1);
  for (int n = 1; n <= arity_cap; ++n)
    out.B.m[n] = std::make_shared<LambdaOp<CF>>(
        out.sp, out.sp, n, 2 - n, [eng, n](const std::vector<Elt<CF>>& xs) {
          auto words = eng->istar(eng->expand_inputs(xs));
          Elt<CF> res = eng->corestrict(eng->apply_delta(words));
          if (n == 1) res += eng->project(exterior_d(*eng->lift(xs[0])));
          res.prune();
          return res;
        });
  return out;
}

// Per-cell Lagrange interpolant of a projector family, sampled at the
// symmetric lattice of denominator d in the chart of each top cell.  The
// lattice restricted to a face is the face's own lattice, so neighbouring
// interpolants agree on shared faces.
template <class CoordF>
struct InterpolatedBundle {
  PiecewiseForm<CF, CoordF> P;
  double defect = 0;  // max |P^2 - P| over a finer sample lattice
};

namespace detail {

inline std::vector<std::vector<int>> simplex_lattice(int n, int d) {
  std::vector<std::vector<int>> pts;
  std::vector<int> a(n, 0);
  while (true) {
    int s = 0;
    for (int x : a) s += x;
    if (s <= d) pts.push_back(a);
    int i = n - 1;
    while (i >= 0 && a[i] == d) a[i--] = 0;
    if (i < 0) break;
    ++a[i];
  }
  return pts;
}

inline CF poly_eval_cf(const Poly<CF>& p, const std::vector<double>& u) {
  CF s(0);
  for (auto& [e, c] : p.c) {
    double m = 1;
    for (size_t i = 0; i < e.size(); ++i)
      for (int t = 0; t < e[i]; ++t) m *= u[i];
    s += c * m;
  }
  return s;
}

}  // namespace detail

template <class CoordF>
InterpolatedBundle<CoordF> interpolate_bundle(const SimplicialComplex<CoordF>& X,
                                              const SmoothBundle& B, int d) {
  if (d < 1) throw std::invalid_argument("interpolate_bundle: degree must be >= 1");
  int n = X.dim();
  int l = B.l;
  auto exps = detail::simplex_lattice(n, d);  // doubles as the monomial basis
  size_t N = exps.size();
  Eigen::MatrixXcd V(N, N);
  for (size_t p = 0; p < N; ++p)
    for (size_t m = 0; m < N; ++m) {
      double v = 1;
      for (int i = 0; i < n; ++i)
        for (int t = 0; t < exps[m][i]; ++t) v *= exps[p][i] / double(d);
      V(p, m) = v;
    }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(V);

  InterpolatedBundle<CoordF> out;
  out.P = PiecewiseForm<CF, CoordF>::zero(X, l);
  auto fine = detail::simplex_lattice(n, 2 * d + 1);
  std::vector<double> defects(X.num(n), 0);
  parallel_for_cells(X.num(n), [&](int t) {
    const Simplex& s = X.cell(n, t);
    // chart var i is the barycentric coordinate of vertex position i, the
    // last position is dependent
    std::vector<double> base(X.ambient);
    std::vector<std::vector<double>> edge(n, std::vector<double>(X.ambient));
    for (int a = 0; a < X.ambient; ++a) {
      base[a] = (double)X.coords[s[n]][a];
      for (int i = 0; i < n; ++i) edge[i][a] = (double)X.coords[s[i]][a] - base[a];
    }
    auto ambient = [&](const std::vector<double>& u) {
      std::vector<double> y = base;
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < X.ambient; ++a) y[a] += u[i] * edge[i][a];
      return y;
    };
    std::vector<CMatD> samples(N);
    for (size_t p = 0; p < N; ++p) {
      std::vector<double> u(n);
      for (int i = 0; i < n; ++i) u[i] = exps[p][i] / double(d);
      samples[p] = B.P(ambient(u));
    }
    for (int e = 0; e < l * l; ++e) {
      Eigen::VectorXcd rhs(N);
      for (size_t p = 0; p < N; ++p) rhs(p) = samples[p][e];
      Eigen::VectorXcd coef = lu.solve(rhs);
      Poly<CF> poly{n, {}};
      for (size_t m = 0; m < N; ++m) {
        CF c = coef(m);
        if (c != CF(0)) poly.c[exps[m]] = c;
      }
      poly.prune();
      if (!poly.is_zero()) out.P.local[t][e].comp[0] = std::move(poly);
    }
    // idempotency defect at a finer lattice
    double dv = 0;
    for (auto& a : fine) {
      std::vector<double> u(n);
      for (int i = 0; i < n; ++i) u[i] = a[i] / double(2 * d + 1);
      CMatD M(l * l, CF(0));
      for (int e = 0; e < l * l; ++e) {
        auto it = out.P.local[t][e].comp.find(0);
        if (it != out.P.local[t][e].comp.end()) M[e] = detail::poly_eval_cf(it->second, u);
      }
      CMatD M2 = cmat_mul(M, M, l);
      for (int e = 0; e < l * l; ++e) dv = std::max(dv, std::abs(M2[e] - M[e]));
    }
    defects[t] = dv;
  });
  for (double dv : defects) out.defect = std::max(out.defect, dv);
  return out;
}

// degree-1 part of the de Rham image of P dP, the connection cochain
template <class CoordF>
Elt<CF> gamma_cochain(const SimplicialComplex<CoordF>& X, const PiecewiseForm<CF, CoordF>& P,
                      GradedSpacePtr sp, const FaceOwners<CoordF>& own) {
  Elt<CF> g = de_rham(X, wedge(P, exterior_d(P)), sp, own);
  Elt<CF> out(sp);
  auto it = g.comp.find(1);
  if (it != g.comp.end()) out.comp[1] = it->second;
  out.prune();
  return out;
}

// real and imaginary parts of a complex piecewise form, for the real-valued
// operator-norm certificates
template <class CoordF>
std::pair<PiecewiseForm<double, CoordF>, PiecewiseForm<double, CoordF>> split_real_imag(
    const PiecewiseForm<CF, CoordF>& pf) {
  auto re = PiecewiseForm<double, CoordF>::zero(*pf.X, pf.l);
  auto im = PiecewiseForm<double, CoordF>::zero(*pf.X, pf.l);
  for (size_t t = 0; t < pf.local.size(); ++t)
    for (int e = 0; e < pf.l * pf.l; ++e)
      for (auto& [m, p] : pf.local[t][e].comp) {
        Poly<double> pr{p.nvar, {}}, pi{p.nvar, {}};
        for (auto& [ex, c] : p.c) {
          if (c.real() != 0) pr.c[ex] = c.real();
          if (c.imag() != 0) pi.c[ex] = c.imag();
        }
        if (!pr.is_zero()) re.local[t][e].comp[m] = std::move(pr);
        if (!pi.is_zero()) im.local[t][e].comp[m] = std::move(pi);
      }
  re.prune();
  im.prune();
  return {std::move(re), std::move(im)};
}

struct PipelineLevel {
  int level = 0;
  int tops = 0;          // number of top cells
  double mesh = 0;       // longest edge
  double defect = 0;     // idempotency defect of the interpolant
  double norm_H = 0;     // worst-star homotopy operator bound
  double norm_gamma = 0; // worst-star connection operator bound (re + im)
  double l2_gamma = 0;   // largest per-star L2 mass of the connection form
  double q = 0;          // worst-star contraction factor
  bool certified = false;
  double tail = 0;       // q^{K+1}/(1-q) series tail past the insertion cap
  CF pairing = CF(0);    // <Tr m_0^gamma, [X]>
  CF chern = CF(0);      // pairing / (2 pi i)
  double d_residual = 0; // coboundary residual of the trace cochain
};

struct PipelineResult {
  std::vector<PipelineLevel> levels;
};

struct PipelineOptions {
  int refine_max = 2;    // barycentric refinements past the input mesh
  int poly_degree = 2;   // interpolation degree per cell
  int arity_cap = 4;     // highest cochain operation used
  int insertion_cap = 6; // connection insertions kept in the deformation
  int cert_degree = 2;   // coefficient degree for the operator-norm bounds
  int threads = 1;
};

// Runs the interpolation / transfer / deformation chain on the input mesh
// and its barycentric refinements.  The cycle z0 fixes the orientation on
// the input mesh and is carried through the refinements.
template <class CoordF>
PipelineResult discrete_pipeline(const SimplicialComplex<CoordF>& X0, const Chain<double>& z0,
                                 const SmoothBundle& bundle, const PipelineOptions& opt) {
  if (X0.dim() != 2) throw std::invalid_argument("discrete_pipeline: need a 2-complex");
  piecewise_threads() = opt.threads;
  PipelineResult out;
  SimplicialComplex<CoordF> X = X0;
  Chain<double> z = z0;
  double mesh = 0;
  for (int e = 0; e < X.num(1); ++e) {
    const Simplex& s = X.cell(1, e);
    double d2 = 0;
    for (int a = 0; a < X.ambient; ++a) {
      double dd = (double)X.coords[s[1]][a] - (double)X.coords[s[0]][a];
      d2 += dd * dd;
    }
    mesh = std::max(mesh, std::sqrt(d2));
  }
  for (int level = 0; level <= opt.refine_max; ++level) {
    PipelineLevel lv;
    lv.level = level;
    lv.tops = X.num(2);
    lv.mesh = mesh;

    auto ib = interpolate_bundle(X, bundle, opt.poly_degree);
    lv.defect = ib.defect;
    auto ca = build_cochain_ainf(X, bundle.l, opt.arity_cap);
    FaceOwners<CoordF> own(X);
    Elt<CF> gc = gamma_cochain(X, ib.P, ca.sp, own);

    // certificates from the Whitney representative of the connection cochain
    auto [gre, gim] = split_real_imag(whitney(X, gc, bundle.l));
    StarBounds br = star_bounds(X, gre, opt.cert_degree);
    StarBounds bi = star_bounds(X, gim, opt.cert_degree);
    for (int v = 0; v < X.num(0); ++v) {
      double ng = br.norm_gamma[v] + bi.norm_gamma[v];
      double qv = br.norm_H[v] * ng;
      lv.norm_H = std::max(lv.norm_H, br.norm_H[v]);
      lv.norm_gamma = std::max(lv.norm_gamma, ng);
      lv.l2_gamma = std::max(
          lv.l2_gamma, std::sqrt(br.l2_gamma[v] * br.l2_gamma[v] + bi.l2_gamma[v] * bi.l2_gamma[v]));
      lv.q = std::max(lv.q, qv);
    }
    lv.certified = lv.q < 1;
    if (lv.certified)
      lv.tail = std::pow(lv.q, opt.insertion_cap + 1) / (1 - lv.q);

    AInf<CF> D = deform_ainf(ca.B, gc, opt.insertion_cap);
    Elt<CF> m0 = D.curvature();
    GradedSpacePtr ssp = cochain_space(X, 1);
    Elt<CF> c1 = cochain_trace<CF>(X, ca.sp, ssp, bundle.l).apply(m0);
    lv.d_residual = coboundary_map<CF>(X, ssp, 1).apply(c1).max_abs();

    Chain<CF> zc;
    zc.k = z.k;
    for (auto& [i, c] : z.coeff) zc.coeff[i] = CF(c, 0);
    lv.pairing = pair_chain(X, c1, 1, zc)[0];
    lv.chern = lv.pairing / CF(0, 2 * std::numbers::pi);
    out.levels.push_back(std::move(lv));

    if (level == opt.refine_max) break;
    auto sd = subdivide_barycentric(X);
    z = aligned_fine_cycle<double>(sd, z);
    mesh = sd.fine_mesh;
    X = std::move(sd.fine);
  }
  return out;
}

}  // namespace cw
