#pragma once

// Piecewise polynomial matrix-valued forms on a simplicial complex: one
// local form per top simplex, compatible on shared faces.  Whitney W, de
// Rham R and the Dupont homotopy H act per top simplex; W images are
// automatically compatible and d, wedge, H preserve compatibility.

#include <Eigen/Dense>

#include <atomic>
#include <thread>

#include "cw/forms.hpp"
#include "cw/simplicial.hpp"

namespace cw {

// worker threads for per-top-cell loops; 1 = serial
inline int& piecewise_threads() {
  static int n = 1;
  return n;
}

template <class Fn>
void parallel_for_cells(int N, Fn&& fn) {
  int T = std::min(piecewise_threads(), N);
  if (T <= 1) {
    for (int i = 0; i < N; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> ws;
  ws.reserve(T);
  for (int w = 0; w < T; ++w)
    ws.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < N;) fn(i);
    });
  for (auto& th : ws) th.join();
}

template <class F, class CoordF>
struct PiecewiseForm {
  const SimplicialComplex<CoordF>* X = nullptr;
  int l = 1;
  // local[t][r*l+c]: entry (r,c) of the matrix form on top cell t
  std::vector<std::vector<Form<F>>> local;

  static PiecewiseForm zero(const SimplicialComplex<CoordF>& X, int l) {
    PiecewiseForm pf;
    pf.X = &X;
    pf.l = l;
    int n = X.dim();
    pf.local.assign(X.num(n), std::vector<Form<F>>(l * l, Form<F>::zero(n)));
    return pf;
  }
  bool is_zero() const {
    for (auto& mats : local)
      for (auto& w : mats)
        if (!w.is_zero()) return false;
    return true;
  }
  void prune() {
    for (auto& mats : local)
      for (auto& w : mats) w.prune();
  }
  PiecewiseForm& operator+=(const PiecewiseForm& o) {
    for (size_t t = 0; t < local.size(); ++t)
      for (int e = 0; e < l * l; ++e) local[t][e] += o.local[t][e];
    return *this;
  }
  PiecewiseForm scaled(const F& s) const {
    PiecewiseForm out = *this;
    for (auto& mats : out.local)
      for (auto& w : mats) w = w.scaled(s);
    return out;
  }
  bool equals(const PiecewiseForm& o, double tol = 0) const {
    for (size_t t = 0; t < local.size(); ++t)
      for (int e = 0; e < l * l; ++e)
        if (!local[t][e].equals(o.local[t][e], tol)) return false;
    return true;
  }
  int poly_degree() const {
    int d = 0;
    for (auto& mats : local)
      for (auto& w : mats) d = std::max(d, w.poly_degree());
    return d;
  }
  double max_abs() const {
    double v = 0;
    for (auto& mats : local)
      for (auto& w : mats) v = std::max(v, w.max_abs());
    return v;
  }
};

// positions of the face's vertices inside the (sorted) top simplex
inline std::vector<int> face_positions(const Simplex& top, const Simplex& face) {
  std::vector<int> I;
  size_t j = 0;
  for (size_t i = 0; i < top.size() && j < face.size(); ++i)
    if (top[i] == face[j]) {
      I.push_back((int)i);
      ++j;
    }
  if (j != face.size()) throw std::invalid_argument("face_positions: not a face");
  return I;
}

// all nonempty increasing position tuples of an (n+1)-vertex simplex
inline const std::vector<std::vector<int>>& position_subsets(int n) {
  constexpr int kMax = 8;
  static const auto table = [] {
    std::vector<std::vector<std::vector<int>>> t(kMax + 1);
    for (int nn = 0; nn <= kMax; ++nn)
      for (uint32_t s = 1; s < (1u << (nn + 1)); ++s) {
        std::vector<int> I;
        for (int i = 0; i <= nn; ++i)
          if (s & (1u << i)) I.push_back(i);
        t[nn].push_back(std::move(I));
      }
    return t;
  }();
  if (n < 0 || n > kMax) throw std::invalid_argument("position_subsets: dimension out of range");
  return table[n];
}

// Whitney interpolation of a matrix cochain (Elt in the cochain space)
template <class F, class CoordF>
PiecewiseForm<F, CoordF> whitney(const SimplicialComplex<CoordF>& X, const Elt<F>& c, int l) {
  auto pf = PiecewiseForm<F, CoordF>::zero(X, l);
  int n = X.dim();
  for (int t = 0; t < X.num(n); ++t) {
    const Simplex& top = X.cell(n, t);
    for (auto& I : position_subsets(n)) {
      int k = (int)I.size() - 1;
      Simplex f;
      for (int i : I) f.push_back(top[i]);
      int fi = X.cell_index(f);
      bool any = false;
      for (int r = 0; r < l && !any; ++r)
        for (int cc = 0; cc < l; ++cc)
          if (!field_traits<F>::is_zero(c.coeff(k, cochain_index(fi, r, cc, l)))) {
            any = true;
            break;
          }
      if (!any) continue;
      Form<F> wI = whitney_face_form<F>(n, I);
      for (int r = 0; r < l; ++r)
        for (int cc = 0; cc < l; ++cc) {
          F v = c.coeff(k, cochain_index(fi, r, cc, l));
          if (!field_traits<F>::is_zero(v)) pf.local[t][r * l + cc] += wI.scaled(v);
        }
    }
  }
  pf.prune();
  return pf;
}

// first top cell containing each cell, with the face positions
template <class CoordF>
struct FaceOwners {
  // owner[k][i] = (top index, positions of cell i inside it)
  std::vector<std::vector<std::pair<int, std::vector<int>>>> owner;

  explicit FaceOwners(const SimplicialComplex<CoordF>& X) {
    int n = X.dim();
    owner.resize(n + 1);
    for (int k = 0; k <= n; ++k) owner[k].assign(X.num(k), {-1, {}});
    for (int t = 0; t < X.num(n); ++t) {
      const Simplex& top = X.cell(n, t);
      for (auto& I : position_subsets(n)) {
        Simplex f;
        for (int i : I) f.push_back(top[i]);
        int k = (int)f.size() - 1;
        int fi = X.cell_index(f);
        if (owner[k][fi].first < 0) owner[k][fi] = {t, I};
      }
    }
  }
};

// de Rham map: integrate the restriction over every face
template <class F, class CoordF>
Elt<F> de_rham(const SimplicialComplex<CoordF>& X, const PiecewiseForm<F, CoordF>& pf,
               GradedSpacePtr sp, const FaceOwners<CoordF>& own) {
  int n = X.dim();
  int l = pf.l;
  Elt<F> out(sp);
  for (int k = 0; k <= n; ++k)
    for (int fi = 0; fi < X.num(k); ++fi) {
      auto& [t, I] = own.owner[k][fi];
      if (t < 0) continue;
      for (int r = 0; r < l; ++r)
        for (int cc = 0; cc < l; ++cc) {
          const Form<F>& w = pf.local[t][r * l + cc];
          if (w.is_zero()) continue;
          F v = integrate_top(restrict_to_positions(w, n, I));
          if (!field_traits<F>::is_zero(v)) out.add_to(k, cochain_index(fi, r, cc, l), v);
        }
    }
  out.prune();
  return out;
}

template <class F, class CoordF>
PiecewiseForm<F, CoordF> exterior_d(const PiecewiseForm<F, CoordF>& pf) {
  PiecewiseForm<F, CoordF> out = pf;
  for (auto& mats : out.local)
    for (auto& w : mats) w = exterior_d(w);
  return out;
}

// matrix wedge: (a ^ b)_{rc} = sum_m a_{rm} ^ b_{mc}
template <class F, class CoordF>
PiecewiseForm<F, CoordF> wedge(const PiecewiseForm<F, CoordF>& a, const PiecewiseForm<F, CoordF>& b) {
  if (a.X != b.X || a.l != b.l) throw std::invalid_argument("wedge: mismatched piecewise forms");
  auto out = PiecewiseForm<F, CoordF>::zero(*a.X, a.l);
  int l = a.l;
  parallel_for_cells((int)a.local.size(), [&](int t) {
    for (int r = 0; r < l; ++r)
      for (int cc = 0; cc < l; ++cc)
        for (int m = 0; m < l; ++m)
          out.local[t][r * l + cc] += wedge(a.local[t][r * l + m], b.local[t][m * l + cc]);
  });
  out.prune();
  return out;
}

// Dupont homotopy on one simplex: H = sum_I (-1)^{|I|} w_I ^ h_{i_k} .. h_{i_0}
template <class F>
Form<F> dupont_h_local(const Form<F>& w, int n) {
  Form<F> out{n, {}};
  for (auto& I : position_subsets(n)) {
    Form<F> cur = w;
    for (int i : I) {
      cur = cone_h(cur, i);
      if (cur.is_zero()) break;
    }
    if (cur.is_zero()) continue;
    Form<F> term = wedge(whitney_face_form<F>(n, I), cur);
    out += (I.size() & 1) ? term.scaled(F(-1)) : term;
  }
  out.prune();
  return out;
}

template <class F, class CoordF>
PiecewiseForm<F, CoordF> dupont_h(const PiecewiseForm<F, CoordF>& pf) {
  PiecewiseForm<F, CoordF> out = pf;
  int n = pf.X->dim();
  parallel_for_cells((int)out.local.size(), [&](int t) {
    for (auto& w : out.local[t]) w = dupont_h_local(w, n);
  });
  return out;
}

template <class F, class CoordF>
PiecewiseForm<F, CoordF> trace_form(const PiecewiseForm<F, CoordF>& pf) {
  auto out = PiecewiseForm<F, CoordF>::zero(*pf.X, 1);
  for (size_t t = 0; t < pf.local.size(); ++t)
    for (int r = 0; r < pf.l; ++r) out.local[t][0] += pf.local[t][r * pf.l + r];
  out.prune();
  return out;
}

// restrictions from all owning top cells agree on every shared face
template <class F, class CoordF>
bool is_compatible(const PiecewiseForm<F, CoordF>& pf, double tol = 0) {
  const auto& X = *pf.X;
  int n = X.dim();
  int l = pf.l;
  for (int k = 0; k < n; ++k)
    for (int fi = 0; fi < X.num(k); ++fi) {
      const Simplex& f = X.cell(k, fi);
      std::vector<std::vector<Form<F>>> seen;
      for (int t = 0; t < X.num(n); ++t) {
        const Simplex& top = X.cell(n, t);
        if (!std::includes(top.begin(), top.end(), f.begin(), f.end())) continue;
        auto I = face_positions(top, f);
        std::vector<Form<F>> loc;
        for (int e = 0; e < l * l; ++e)
          loc.push_back(restrict_to_positions(pf.local[t][e], n, I));
        if (!seen.empty()) {
          for (int e = 0; e < l * l; ++e)
            if (!loc[e].equals(seen[0][e], tol)) return false;
        } else {
          seen.push_back(loc);
        }
      }
    }
  return true;
}

// compose a polynomial with images of its variables (all in the target
// variable set)
template <class F>
Poly<F> poly_compose(const Poly<F>& p, const std::vector<Poly<F>>& images) {
  int nv = images.empty() ? 0 : images[0].nvar;
  Poly<F> out{nv, {}};
  for (auto& [e, v] : p.c) {
    Poly<F> term = Poly<F>::constant(nv, v);
    for (int i = 0; i < p.nvar; ++i)
      for (int k = 0; k < e[i]; ++k) term = term * images[i];
    out += term;
  }
  out.prune();
  return out;
}

// affine change of barycentric charts: substitute every chart variable and
// differential by the given images
template <class F>
Form<F> form_affine_substitute(const Form<F>& w, const std::vector<Poly<F>>& lam_img,
                               const std::vector<Form<F>>& dlam_img) {
  int nt = lam_img.empty() ? 0 : lam_img[0].nvar;
  Form<F> out{nt, {}};
  for (auto& [m, p] : w.comp) {
    Form<F> term{nt, {}};
    term.comp[0] = poly_compose(p, lam_img);
    for (int i = 0; i < w.n; ++i)
      if (m & (1u << i)) term = wedge(term, dlam_img[i]);
    out += term;
  }
  out.prune();
  return out;
}

// re-express a piecewise form on the barycentric subdivision (same pointwise
// form, finer charts); used to track a fixed connection under refinement
template <class F, class CoordF>
PiecewiseForm<F, CoordF> subdivide_form(const SubdivisionData<CoordF>& sd,
                                        const SimplicialComplex<CoordF>& coarse,
                                        const PiecewiseForm<F, CoordF>& pf) {
  const auto& Y = sd.fine;
  int n = Y.dim();
  auto out = PiecewiseForm<F, CoordF>::zero(Y, pf.l);
  parallel_for_cells(Y.num(n), [&](int t) {
    auto [pt, sgn] = sd.top_parent[t];
    (void)sgn;
    const Simplex& ctop = coarse.cell(n, pt);
    const Simplex& ftop = Y.cell(n, t);
    // a[i][j] = coarse lambda_{ctop[i]} evaluated at fine vertex ftop[j]
    // (fine vertices are barycenters of coarse faces)
    std::vector<std::vector<F>> a(n + 1, std::vector<F>(n + 1, F(0)));
    for (int j = 0; j <= n; ++j) {
      const Simplex& S = sd.vertex_parent[ftop[j]];
      for (int i = 0; i <= n; ++i)
        if (std::find(S.begin(), S.end(), ctop[i]) != S.end())
          a[i][j] = F(1) / field_traits<F>::from_int((long)S.size());
    }
    std::vector<Poly<F>> lam_img;
    std::vector<Form<F>> dlam_img;
    for (int i = 0; i < n; ++i) {
      Poly<F> p = Poly<F>::zero(n);
      Form<F> d = Form<F>::zero(n);
      for (int j = 0; j <= n; ++j) {
        if (field_traits<F>::is_zero(a[i][j])) continue;
        p += lambda_poly<F>(n, j).scaled(a[i][j]);
        d += dlambda_form<F>(n, j).scaled(a[i][j]);
      }
      lam_img.push_back(p);
      dlam_img.push_back(d);
    }
    for (int e = 0; e < pf.l * pf.l; ++e)
      out.local[t][e] = form_affine_substitute(pf.local[pt][e], lam_img, dlam_img);
  });
  out.prune();
  return out;
}

// --- L2 norms and per-star bounds -----------------------------------------

// Gram data of one top simplex: metric coefficients of the barycentric
// gradients restricted to the chart variables, plus the volume
template <class CoordF>
struct SimplexMetric {
  int n = 0;
  double vol = 0;
  Eigen::MatrixXd g;  // g(i,j) = grad lambda_i . grad lambda_j, chart i,j < n
};

template <class CoordF>
SimplexMetric<CoordF> simplex_metric(const SimplicialComplex<CoordF>& X, int t) {
  int n = X.dim();
  const Simplex& s = X.cell(n, t);
  Eigen::MatrixXd E(X.ambient, n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < X.ambient; ++a)
      E(a, i) = SimplicialComplex<CoordF>::field_traits_coord(X.coords[s[i + 1]][a]) -
                SimplicialComplex<CoordF>::field_traits_coord(X.coords[s[0]][a]);
  // gradients of lambda_1..lambda_n are the rows of (E^T E)^{-1} E^T,
  // grad lambda_0 = -sum of the others
  Eigen::MatrixXd Gt = (E.transpose() * E).ldlt().solve(E.transpose());  // n x ambient
  Eigen::MatrixXd grads(n + 1, X.ambient);
  grads.row(0).setZero();
  for (int i = 1; i <= n; ++i) {
    grads.row(i) = Gt.row(i - 1);
    grads.row(0) -= Gt.row(i - 1);
  }
  SimplexMetric<CoordF> out;
  out.n = n;
  out.vol = X.volume(s);
  out.g = Eigen::MatrixXd(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.g(i, j) = grads.row(i).dot(grads.row(j));
  return out;
}

// <dlambda_A, dlambda_B> = det of the metric submatrix
template <class CoordF>
double mask_inner(const SimplexMetric<CoordF>& m, uint32_t A, uint32_t B) {
  std::vector<int> a, b;
  for (int i = 0; i < m.n; ++i) {
    if (A & (1u << i)) a.push_back(i);
    if (B & (1u << i)) b.push_back(i);
  }
  if (a.size() != b.size()) return 0;
  if (a.empty()) return 1;
  Eigen::MatrixXd sub(a.size(), a.size());
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) sub(i, j) = m.g(a[i], b[j]);
  return sub.determinant();
}

// exact chart integral of a monomial, as double
inline double chart_monomial_integral(const std::vector<int>& e) {
  double num = 1;
  long s = 0;
  for (int x : e) {
    for (int t = 2; t <= x; ++t) num *= t;
    s += x;
  }
  double den = 1;
  for (long t = 2; t <= s + (long)e.size(); ++t) den *= t;
  return num / den;
}

inline double scalar_to_double(const Rat& x) { return x.convert_to<double>(); }
inline double scalar_to_double(const double& x) { return x; }

template <class F>
Form<double> to_double_form(const Form<F>& w) {
  Form<double> out{w.n, {}};
  for (auto& [m, p] : w.comp) {
    Poly<double> q{p.nvar, {}};
    for (auto& [e, v] : p.c) q.c[e] = scalar_to_double(v);
    q.prune();
    if (!q.is_zero()) out.comp[m] = q;
  }
  return out;
}

// L2 inner product of two scalar forms (Rat or double coefficients)
template <class F, class CoordF>
double form_l2_inner(const SimplexMetric<CoordF>& m, const Form<F>& a, const Form<F>& b) {
  int n = m.n;
  double nfact = 1;
  for (int i = 2; i <= n; ++i) nfact *= i;
  double total = 0;
  for (auto& [ma, pa] : a.comp)
    for (auto& [mb, pb] : b.comp) {
      double gi = mask_inner(m, ma, mb);
      if (gi == 0) continue;
      // integral of pa*pb over the simplex = n! vol * chart integral
      double iv = 0;
      for (auto& [ea, va] : pa.c)
        for (auto& [eb, vb] : pb.c) {
          std::vector<int> e(n);
          for (int i = 0; i < n; ++i) e[i] = ea[i] + eb[i];
          iv += scalar_to_double(va) * scalar_to_double(vb) * chart_monomial_integral(e);
        }
      total += gi * iv * nfact * m.vol;
    }
  return total;
}

// squared L2 norm of a piecewise matrix form (Frobenius over entries)
template <class F, class CoordF>
double l2_norm_sq(const PiecewiseForm<F, CoordF>& pf) {
  const auto& X = *pf.X;
  int n = X.dim();
  double total = 0;
  for (int t = 0; t < X.num(n); ++t) {
    auto m = simplex_metric(X, t);
    for (auto& w : pf.local[t]) total += form_l2_inner(m, w, w);
  }
  return total;
}

// Basis of scalar forms of coefficient degree <= D on an n-simplex.
struct FormBasis {
  int n = 0, D = 0;
  std::vector<std::pair<uint32_t, std::vector<int>>> items;  // (mask, exponents)
};

inline FormBasis form_basis(int n, int D) {
  FormBasis fb;
  fb.n = n;
  fb.D = D;
  std::vector<std::vector<int>> exps;
  std::vector<int> e(n, 0);
  // enumerate exponent vectors with sum <= D
  while (true) {
    int s = 0;
    for (int x : e) s += x;
    if (s <= D) exps.push_back(e);
    int i = n - 1;
    while (i >= 0 && e[i] == D) e[i--] = 0;
    if (i < 0) break;
    ++e[i];
  }
  for (uint32_t m = 0; m < (1u << n); ++m)
    for (auto& ex : exps) fb.items.push_back({m, ex});
  return fb;
}

template <class F>
Form<F> basis_form(const FormBasis& fb, size_t i) {
  Form<F> w{fb.n, {}};
  Poly<F> p{fb.n, {}};
  p.c[fb.items[i].second] = F(1);
  w.comp[fb.items[i].first] = p;
  return w;
}

// Gram matrix of the basis on top cell t
template <class CoordF>
Eigen::MatrixXd basis_gram(const SimplexMetric<CoordF>& m, const FormBasis& fb) {
  size_t N = fb.items.size();
  Eigen::MatrixXd G(N, N);
  for (size_t i = 0; i < N; ++i)
    for (size_t j = 0; j <= i; ++j) {
      double v = form_l2_inner(m, basis_form<double>(fb, i), basis_form<double>(fb, j));
      G(i, j) = v;
      G(j, i) = v;
    }
  return G;
}

// L2 -> L2 operator norm of a linear map given by images of basis forms,
// computed via symmetric eigenvalues of G_in^{-1} M^T G_out M
inline double operator_norm(const Eigen::MatrixXd& G_in, const Eigen::MatrixXd& G_out,
                            const Eigen::MatrixXd& M) {
  Eigen::LLT<Eigen::MatrixXd> llt_in(G_in), llt_out(G_out);
  // A = L_out^T M L_in^{-T}; norm = sigma_max(A)
  Eigen::MatrixXd Lin = Eigen::MatrixXd(llt_in.matrixL());
  Eigen::MatrixXd Lout = Eigen::MatrixXd(llt_out.matrixL());
  Eigen::MatrixXd A = Lout.transpose() * M *
                      Lin.transpose().triangularView<Eigen::Upper>().solve(
                          Eigen::MatrixXd::Identity(M.cols(), M.cols()));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

// expand a form in a basis (exact fit required: every term must be in range)
template <class F>
Eigen::VectorXd form_coords(const FormBasis& fb, const Form<F>& w) {
  std::map<std::pair<uint32_t, std::vector<int>>, int> pos;
  for (size_t i = 0; i < fb.items.size(); ++i) pos[fb.items[i]] = (int)i;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(fb.items.size());
  for (auto& [m, p] : w.comp)
    for (auto& [e, c] : p.c) {
      auto it = pos.find({m, e});
      if (it == pos.end()) throw std::invalid_argument("form_coords: degree overflow");
      v(it->second) = scalar_to_double(c);
    }
  return v;
}

// Per-star certificate data: upper bounds for ||H|| and ||gammahat|| on the
// polynomial subspace of coefficient degree <= D, and q = ||gammahat||*||H||.
struct StarBounds {
  std::vector<double> norm_H;      // per vertex star, wedge/homotopy operator bounds
  std::vector<double> norm_gamma;  // per vertex star
  std::vector<double> l2_gamma;    // L2 norm of gamma itself restricted to the star
  std::vector<double> q;           // norm_gamma * norm_H per star
};

template <class F, class CoordF>
StarBounds star_bounds(const SimplicialComplex<CoordF>& X, const PiecewiseForm<F, CoordF>& gamma,
                       int D) {
  int n = X.dim();
  int l = gamma.l;
  FormBasis fb_in = form_basis(n, D);
  // H raises the coefficient degree by up to one per cone contraction plus
  // one for the Whitney factor; size the output basis from the images
  std::vector<Form<double>> h_images(fb_in.items.size());
  int Dh = D;
  for (size_t i = 0; i < fb_in.items.size(); ++i) {
    h_images[i] = dupont_h_local(basis_form<double>(fb_in, i), n);
    Dh = std::max(Dh, h_images[i].poly_degree());
  }
  FormBasis fb_h = form_basis(n, Dh);
  // per top cell: ||H||, scalar wedge norms of the entries of gamma, and the
  // squared L2 mass of gamma on the cell
  std::vector<double> hn(X.num(n), 0), gn(X.num(n), 0), gm(X.num(n), 0);
  parallel_for_cells(X.num(n), [&](int t) {
    auto m = simplex_metric(X, t);
    for (auto& w : gamma.local[t]) gm[t] += form_l2_inner(m, w, w);
    Eigen::MatrixXd G_in = basis_gram(m, fb_in);
    Eigen::MatrixXd G_h = basis_gram(m, fb_h);
    Eigen::MatrixXd MH(fb_h.items.size(), fb_in.items.size());
    for (size_t i = 0; i < fb_in.items.size(); ++i) MH.col(i) = form_coords(fb_h, h_images[i]);
    hn[t] = operator_norm(G_in, G_h, MH);
    int Dg = 0;
    for (auto& w : gamma.local[t]) Dg = std::max(Dg, w.poly_degree());
    FormBasis fb_g = form_basis(n, D + Dg);
    Eigen::MatrixXd G_g = basis_gram(m, fb_g);
    // row-sum bound over matrix entries: ||gammahat|| <= sqrt(max_r sum_m ||g_{rm}^||^2)
    double best = 0;
    for (int r = 0; r < l; ++r) {
      double row = 0;
      for (int mm = 0; mm < l; ++mm) {
        Form<double> ge = to_double_form(gamma.local[t][r * l + mm]);
        if (ge.is_zero()) continue;
        Eigen::MatrixXd MG(fb_g.items.size(), fb_in.items.size());
        for (size_t i = 0; i < fb_in.items.size(); ++i)
          MG.col(i) = form_coords(fb_g, wedge(ge, basis_form<double>(fb_in, i)));
        double nm = operator_norm(G_in, G_g, MG);
        row += nm * nm;
      }
      best = std::max(best, row);
    }
    gn[t] = std::sqrt(best);
  });
  StarBounds out;
  out.norm_H.assign(X.num(0), 0);
  out.norm_gamma.assign(X.num(0), 0);
  out.l2_gamma.assign(X.num(0), 0);
  out.q.assign(X.num(0), 0);
  for (int v = 0; v < X.num(0); ++v) {
    double mass = 0;
    for (int t = 0; t < X.num(n); ++t) {
      const Simplex& s = X.cell(n, t);
      if (std::find(s.begin(), s.end(), v) == s.end()) continue;
      out.norm_H[v] = std::max(out.norm_H[v], hn[t]);
      out.norm_gamma[v] = std::max(out.norm_gamma[v], gn[t]);
      mass += gm[t];
    }
    out.l2_gamma[v] = std::sqrt(mass);
    out.q[v] = out.norm_H[v] * out.norm_gamma[v];
  }
  return out;
}

}  // namespace cw
