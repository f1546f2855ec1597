#pragma once

// Smooth-side oracle: numerical integration of (1/k!) Tr(P (dP)^{2k}) over
// the fundamental cycle of a triangulated 2k-manifold, with Gauss quadrature
// on each top simplex.  Convergence across quadrature orders is the oracle's
// own certificate.  The built-in bott-sphere bundle P = (1 + x.sigma)/2 on
// the unit sphere has Chern number 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cw/simplicial.hpp"

namespace cw {

// l x l complex matrix, row major
using CMatD = std::vector<CF>;

inline CMatD cmat_mul(const CMatD& a, const CMatD& b, int l) {
  CMatD c(l * l, CF(0));
  for (int i = 0; i < l; ++i)
    for (int k = 0; k < l; ++k) {
      CF av = a[i * l + k];
      if (av == CF(0)) continue;
      for (int j = 0; j < l; ++j) c[i * l + j] += av * b[k * l + j];
    }
  return c;
}

inline CF cmat_trace(const CMatD& a, int l) {
  CF t(0);
  for (int i = 0; i < l; ++i) t += a[i * l + i];
  return t;
}

// Piecewise-smooth idempotent over ambient space, with an exact directional
// derivative.  Both callables receive ambient points (and a direction).
struct SmoothBundle {
  int l = 1;
  std::function<CMatD(const std::vector<double>&)> P;
  std::function<CMatD(const std::vector<double>&, const std::vector<double>&)> dP;
};

// Bott projector on the 2-sphere: P(x) = (1 + n(x).sigma)/2 evaluated at the
// radial projection n(x) = x/|x|; the derivative uses
// dn = (h - n (n.h))/|x| for ambient direction h.
inline SmoothBundle bott_sphere() {
  SmoothBundle B;
  B.l = 2;
  auto pauli_combo = [](double a, double b, double c) {
    // a sigma_x + b sigma_y + c sigma_z
    return CMatD{CF(c, 0), CF(a, -b), CF(a, b), CF(-c, 0)};
  };
  B.P = [pauli_combo](const std::vector<double>& x) {
    double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    CMatD m = pauli_combo(x[0] / r, x[1] / r, x[2] / r);
    for (auto& c : m) c *= 0.5;
    m[0] += 0.5;
    m[3] += 0.5;
    return m;
  };
  B.dP = [pauli_combo](const std::vector<double>& x, const std::vector<double>& h) {
    double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    double nh = (x[0] * h[0] + x[1] * h[1] + x[2] * h[2]) / (r * r);
    std::vector<double> dn(3);
    for (int a = 0; a < 3; ++a) dn[a] = (h[a] - x[a] * nh) / r;
    CMatD m = pauli_combo(dn[0], dn[1], dn[2]);
    for (auto& c : m) c *= 0.5;
    return m;
  };
  return B;
}

// constant projector onto the first `rank` coordinates
inline SmoothBundle trivial_bundle(int l, int rank) {
  SmoothBundle B;
  B.l = l;
  B.P = [l, rank](const std::vector<double>&) {
    CMatD m(l * l, CF(0));
    for (int i = 0; i < rank; ++i) m[i * l + i] = CF(1);
    return m;
  };
  B.dP = [l](const std::vector<double>&, const std::vector<double>&) {
    return CMatD(l * l, CF(0));
  };
  return B;
}

inline SmoothBundle direct_sum(const SmoothBundle& a, const SmoothBundle& b) {
  SmoothBundle B;
  int la = a.l, lb = b.l, l = la + lb;
  B.l = l;
  auto embed = [la, lb, l](const CMatD& ma, const CMatD& mb) {
    CMatD m(l * l, CF(0));
    for (int i = 0; i < la; ++i)
      for (int j = 0; j < la; ++j) m[i * l + j] = ma[i * la + j];
    for (int i = 0; i < lb; ++i)
      for (int j = 0; j < lb; ++j) m[(la + i) * l + (la + j)] = mb[i * lb + j];
    return m;
  };
  B.P = [a, b, embed](const std::vector<double>& x) { return embed(a.P(x), b.P(x)); };
  B.dP = [a, b, embed](const std::vector<double>& x, const std::vector<double>& h) {
    return embed(a.dP(x, h), b.dP(x, h));
  };
  return B;
}

// Gauss-Legendre nodes and weights on [0, 1], by Newton iteration on the
// Legendre polynomial.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // recompute derivative at the root for the weight
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1);
    nodes[i] = (x + 1) / 2;
    weights[i] = 1.0 / ((1 - x * x) * dp * dp);
  }
}

// quadrature rule on the standard n-simplex {u_i >= 0, sum <= 1} via the
// Duffy collapse of the tensor-product Gauss rule
struct SimplexRule {
  std::vector<std::vector<double>> points;  // chart coordinates u_1..u_n
  std::vector<double> weights;
};

inline SimplexRule simplex_rule(int n, int order) {
  if (order < 1) throw std::invalid_argument("simplex_rule: order must be >= 1");
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);
  SimplexRule rule;
  std::vector<int> idx(n, 0);
  while (true) {
    std::vector<double> u(n);
    double w = 1.0, rem = 1.0;
    for (int i = 0; i < n; ++i) {
      double s = gx[idx[i]];
      u[i] = rem * s;
      w *= gw[idx[i]] * rem;
      rem *= 1 - s;
    }
    rule.points.push_back(u);
    rule.weights.push_back(w);
    int i = n - 1;
    while (i >= 0 && idx[i] + 1 == order) idx[i--] = 0;
    if (i < 0) break;
    ++idx[i];
  }
  return rule;
}

struct OracleResult {
  CF raw = CF(0);                 // integral of (1/k!) Tr(P (dP)^{2k})
  CF chern = CF(0);               // raw / (2 pi i)^k
  std::vector<double> per_order;  // |chern| at quadrature orders 1..order
  double convergence = 0.0;       // change between the last two orders
};

// the fundamental cycle of the octahedron, oriented outward: the coefficient
// of the all-positive face {+e_x, +e_y, +e_z} is +1
template <class CoordF>
Chain<double> outward_cycle(const SimplicialComplex<CoordF>& X) {
  auto z = fundamental_cycle<double>(X);
  Simplex top = {0, 2, 4};
  auto it = z.coeff.find(X.cell_index(top));
  if (it != z.coeff.end() && it->second < 0)
    for (auto& [i, c] : z.coeff) c = -c;
  return z;
}

// integral of (1/k!) Tr(P (dP)^{2k}) over the given top-dimensional cycle
template <class CoordF>
CF oracle_integral(const SmoothBundle& B, const SimplicialComplex<CoordF>& X,
                   const Chain<double>& z, int order, int k) {
  int n = X.dim();
  if (n != 2 * k) throw std::invalid_argument("oracle_integral: need dim X = 2k");
  if (z.k != n) throw std::invalid_argument("oracle_integral: cycle degree mismatch");
  auto rule = simplex_rule(n, order);
  std::vector<std::vector<int>> perms;
  {
    std::vector<int> base(n);
    for (int i = 0; i < n; ++i) base[i] = i;
    do perms.push_back(base);
    while (std::next_permutation(base.begin(), base.end()));
  }
  long kfact = 1;
  for (int i = 2; i <= k; ++i) kfact *= i;
  CF total(0);
  for (auto& [ci, orient] : z.coeff) {
    const Simplex& s = X.cell(n, ci);
    std::vector<double> p0(X.coords[s[0]].size());
    for (size_t a = 0; a < p0.size(); ++a) p0[a] = (double)X.coords[s[0]][a];
    std::vector<std::vector<double>> edge(n, p0);
    for (int i = 0; i < n; ++i)
      for (size_t a = 0; a < p0.size(); ++a)
        edge[i][a] = (double)X.coords[s[i + 1]][a] - p0[a];
    CF cellval(0);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      std::vector<double> y = p0;
      for (int i = 0; i < n; ++i)
        for (size_t a = 0; a < y.size(); ++a) y[a] += rule.points[q][i] * edge[i][a];
      CMatD P = B.P(y);
      std::vector<CMatD> Pd(n);
      for (int i = 0; i < n; ++i) Pd[i] = B.dP(y, edge[i]);
      CF val(0);
      for (auto& sigma : perms) {
        CMatD prod = P;
        for (int i = 0; i < n; ++i) prod = cmat_mul(prod, Pd[sigma[i]], B.l);
        CF t = cmat_trace(prod, B.l);
        if (perm_sign(sigma) < 0) t = -t;
        val += t;
      }
      cellval += rule.weights[q] * val;
    }
    total += orient * cellval;
  }
  return total / CF((double)kfact, 0);
}

// runs the integral at quadrature orders 1..order and reports the value at
// the highest order together with the cross-order convergence estimate
template <class CoordF>
OracleResult smooth_oracle(const SmoothBundle& B, const SimplicialComplex<CoordF>& X,
                           const Chain<double>& z, int order, int k = 1) {
  OracleResult out;
  CF norm = std::pow(CF(0, 2 * std::numbers::pi), k);
  CF prev(0);
  for (int q = 1; q <= order; ++q) {
    CF raw = oracle_integral(B, X, z, q, k);
    CF ch = raw / norm;
    out.per_order.push_back(std::abs(ch));
    if (q == order) {
      out.raw = raw;
      out.chern = ch;
    }
    if (q > 1) out.convergence = std::abs(ch - prev);
    prev = ch;
  }
  return out;
}

}  // namespace cw
