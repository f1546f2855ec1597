#pragma once

// Polynomial differential forms on simplices and piecewise forms on a
// complex, with the Whitney interpolation W, the de Rham integration map R
// and the Dupont homotopy H built from per-vertex cone contractions.
//
// Normal form: on an n-simplex the barycentric coordinates satisfy
// sum lambda_i = 1, so lambda_n and dlambda_n are eliminated; polynomials
// live in lambda_0..lambda_{n-1} and differentials are masks over
// dlambda_0..dlambda_{n-1}.  The de Rham map integrates the chart
// (lambda_0..lambda_{n-1}) with the orientation correction (-1)^k pinned by
// R(W(top indicator)) = 1.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "cw/graded.hpp"
#include "cw/simplicial.hpp"

namespace cw {

// sparse polynomial; exponent vectors all have length nvar
template <class F>
struct Poly {
  int nvar = 0;
  std::map<std::vector<int>, F> c;

  static Poly zero(int nvar) { return Poly{nvar, {}}; }
  static Poly constant(int nvar, const F& v) {
    Poly p{nvar, {}};
    if (!field_traits<F>::is_zero(v)) p.c[std::vector<int>(nvar, 0)] = v;
    return p;
  }
  static Poly var(int nvar, int i) {
    Poly p{nvar, {}};
    std::vector<int> e(nvar, 0);
    e[i] = 1;
    p.c[e] = F(1);
    return p;
  }
  bool is_zero() const { return c.empty(); }
  void prune() {
    for (auto it = c.begin(); it != c.end();)
      it = field_traits<F>::is_zero(it->second) ? c.erase(it) : std::next(it);
  }
  Poly& operator+=(const Poly& o) {
    for (auto& [e, v] : o.c) {
      c[e] += v;
      if (field_traits<F>::is_zero(c[e])) c.erase(e);
    }
    return *this;
  }
  Poly operator*(const Poly& o) const {
    Poly out{nvar, {}};
    for (auto& [e1, v1] : c)
      for (auto& [e2, v2] : o.c) {
        std::vector<int> e(nvar);
        for (int i = 0; i < nvar; ++i) e[i] = e1[i] + e2[i];
        out.c[e] += v1 * v2;
      }
    out.prune();
    return out;
  }
  Poly scaled(const F& s) const {
    Poly out{nvar, {}};
    if (field_traits<F>::is_zero(s)) return out;
    for (auto& [e, v] : c) out.c[e] = v * s;
    return out;
  }
  int degree() const {
    int d = 0;
    for (auto& [e, v] : c) {
      int t = 0;
      for (int x : e) t += x;
      d = std::max(d, t);
    }
    return d;
  }
  double max_abs() const {
    double m = 0;
    for (auto& [e, v] : c) m = std::max(m, field_traits<F>::abs(v));
    return m;
  }
};

// partial derivative wrt chart variable i
template <class F>
Poly<F> poly_diff(const Poly<F>& p, int i) {
  Poly<F> out{p.nvar, {}};
  for (auto& [e, v] : p.c) {
    if (e[i] == 0) continue;
    std::vector<int> e2 = e;
    e2[i] -= 1;
    out.c[e2] += v * field_traits<F>::from_int(e[i]);
  }
  out.prune();
  return out;
}

// substitute variable i by a polynomial in the remaining variables and drop
// the variable (image must not involve variable i)
template <class F>
Poly<F> poly_subst_drop(const Poly<F>& p, int i, const Poly<F>& image_small) {
  // image_small has nvar-1 variables, indexed with i removed
  Poly<F> out{p.nvar - 1, {}};
  // group by exponent of variable i
  std::map<int, Poly<F>> by_pow;
  for (auto& [e, v] : p.c) {
    std::vector<int> e2;
    for (int j = 0; j < p.nvar; ++j)
      if (j != i) e2.push_back(e[j]);
    auto it = by_pow.find(e[i]);
    if (it == by_pow.end()) it = by_pow.emplace(e[i], Poly<F>::zero(p.nvar - 1)).first;
    it->second.c[e2] += v;
  }
  Poly<F> pw = Poly<F>::constant(p.nvar - 1, F(1));
  int last = 0;
  for (auto& [a, q] : by_pow) {
    for (; last < a; ++last) pw = pw * image_small;
    out += q * pw;
  }
  out.prune();
  return out;
}

// differential form on one simplex; possibly inhomogeneous across masks
template <class F>
struct Form {
  int n = 0;  // simplex dimension, chart variables 0..n-1
  std::map<uint32_t, Poly<F>> comp;  // bit i set = dlambda_i present

  static Form zero(int n) { return Form{n, {}}; }
  bool is_zero() const { return comp.empty(); }
  void prune() {
    for (auto it = comp.begin(); it != comp.end();) {
      it->second.prune();
      it = it->second.is_zero() ? comp.erase(it) : std::next(it);
    }
  }
  void add_term(uint32_t mask, const Poly<F>& p) {
    if (p.is_zero()) return;
    auto it = comp.find(mask);
    if (it == comp.end()) {
      comp[mask] = p;
    } else {
      it->second += p;
      if (it->second.is_zero()) comp.erase(it);
    }
  }
  Form& operator+=(const Form& o) {
    for (auto& [m, p] : o.comp) add_term(m, p);
    return *this;
  }
  Form scaled(const F& s) const {
    Form out{n, {}};
    if (field_traits<F>::is_zero(s)) return out;
    for (auto& [m, p] : comp) out.comp[m] = p.scaled(s);
    return out;
  }
  bool equals(const Form& o, double tol = 0) const {
    Form d = *this;
    d += o.scaled(F(-1));
    d.prune();
    if (tol == 0) return d.is_zero();
    for (auto& [m, p] : d.comp)
      if (p.max_abs() > tol) return false;
    return true;
  }
  // top form-degree present
  int degree() const {
    int d = 0;
    for (auto& [m, p] : comp) d = std::max(d, __builtin_popcount(m));
    return d;
  }
  int poly_degree() const {
    int d = 0;
    for (auto& [m, p] : comp) d = std::max(d, p.degree());
    return d;
  }
  double max_abs() const {
    double v = 0;
    for (auto& [m, p] : comp) v = std::max(v, p.max_abs());
    return v;
  }
};

// sign of dlambda_A ^ dlambda_B as a reordering into the increasing tuple
inline int mask_merge_sign(uint32_t A, uint32_t B) {
  int inv = 0;
  for (int b = 0; b < 32; ++b)
    if (B & (1u << b)) inv += __builtin_popcount(A >> (b + 1));
  return (inv & 1) ? -1 : 1;
}

template <class F>
Form<F> wedge(const Form<F>& a, const Form<F>& b) {
  if (a.n != b.n) throw std::invalid_argument("wedge: simplex dimension mismatch");
  Form<F> out{a.n, {}};
  for (auto& [ma, pa] : a.comp)
    for (auto& [mb, pb] : b.comp) {
      if (ma & mb) continue;
      Poly<F> p = pa * pb;
      if (mask_merge_sign(ma, mb) < 0) p = p.scaled(F(-1));
      out.add_term(ma | mb, p);
    }
  out.prune();
  return out;
}

template <class F>
Form<F> exterior_d(const Form<F>& w) {
  Form<F> out{w.n, {}};
  for (auto& [m, p] : w.comp)
    for (int j = 0; j < w.n; ++j) {
      if (m & (1u << j)) continue;
      Poly<F> dp = poly_diff(p, j);
      if (dp.is_zero()) continue;
      // dlambda_j ^ dlambda_m: j hops over the elements of m smaller than j
      int hops = __builtin_popcount(m & ((1u << j) - 1));
      if (hops & 1) dp = dp.scaled(F(-1));
      out.add_term(m | (1u << j), dp);
    }
  out.prune();
  return out;
}

// barycentric coordinate as a chart polynomial (i = n gives 1 - sum)
template <class F>
Poly<F> lambda_poly(int n, int i) {
  if (i < n) return Poly<F>::var(n, i);
  Poly<F> p = Poly<F>::constant(n, F(1));
  for (int j = 0; j < n; ++j) p += Poly<F>::var(n, j).scaled(F(-1));
  return p;
}

// dlambda_i as a form (i = n gives -sum dlambda_j)
template <class F>
Form<F> dlambda_form(int n, int i) {
  Form<F> w{n, {}};
  if (i < n) {
    w.comp[1u << i] = Poly<F>::constant(n, F(1));
  } else {
    for (int j = 0; j < n; ++j) w.comp[1u << j] = Poly<F>::constant(n, F(-1));
  }
  return w;
}

// Whitney elementary form of the face with increasing vertex positions I:
// |I-1|! * sum_j (-1)^j lambda_{i_j} dlambda_{i_0} ^ ... ^ (omit j) ^ ...
template <class F>
Form<F> whitney_face_form(int n, const std::vector<int>& I) {
  int k = (int)I.size() - 1;
  Form<F> out{n, {}};
  for (int j = 0; j <= k; ++j) {
    Form<F> term{n, {}};
    term.comp[0] = lambda_poly<F>(n, I[j]);
    for (int m = 0; m <= k; ++m) {
      if (m == j) continue;
      term = wedge(term, dlambda_form<F>(n, I[m]));
    }
    out += (j & 1) ? term.scaled(F(-1)) : term;
  }
  F fact(1);
  for (int i = 2; i <= k; ++i) fact *= field_traits<F>::from_int(i);
  return out.scaled(fact);
}

// restriction to the face omitting vertex j (vertex order preserved)
template <class F>
Form<F> restrict_drop(const Form<F>& w, int j) {
  int n = w.n;
  if (n == 0) throw std::invalid_argument("restrict_drop: 0-simplex has no faces");
  Form<F> out{n - 1, {}};
  if (j < n) {
    // lambda_j -> 0, dlambda_j -> 0, shift higher variables down
    for (auto& [m, p] : w.comp) {
      if (m & (1u << j)) continue;
      Poly<F> q{n - 1, {}};
      for (auto& [e, v] : p.c) {
        if (e[j] != 0) continue;
        std::vector<int> e2;
        for (int i = 0; i < n; ++i)
          if (i != j) e2.push_back(e[i]);
        q.c[e2] += v;
      }
      q.prune();
      uint32_t lo = m & ((1u << j) - 1);
      uint32_t hi = (m >> (j + 1)) << j;
      out.add_term(lo | hi, q);
    }
  } else {
    // face 0..n-1; impose lambda_n = 0, i.e. lambda_{n-1} = 1 - sum_{i<n-1},
    // dlambda_{n-1} = -sum_{i<n-1} dlambda_i; variable n-1 disappears
    Poly<F> img = lambda_poly<F>(n - 1, n - 1);  // 1 - sum in n-1 vars
    for (auto& [m, p] : w.comp) {
      Poly<F> q = poly_subst_drop(p, n - 1, img);
      if (q.is_zero()) continue;
      if (m & (1u << (n - 1))) {
        uint32_t base = m & ~(1u << (n - 1));
        // dlambda_{n-1} sits last in the increasing tuple, so the
        // substituted sum wedges in from the right
        for (int i = 0; i < n - 1; ++i) {
          if (base & (1u << i)) continue;
          int hops = __builtin_popcount(base >> (i + 1));
          F s = (hops & 1) ? F(1) : F(-1);  // includes the -1 of the image
          out.add_term(base | (1u << i), q.scaled(s));
        }
      } else {
        out.add_term(m, q);
      }
    }
  }
  out.prune();
  return out;
}

// iterated restriction to the face with increasing vertex positions I
template <class F>
Form<F> restrict_to_positions(Form<F> w, int n, const std::vector<int>& I) {
  std::vector<char> keep(n + 1, 0);
  for (int i : I) keep[i] = 1;
  for (int j = n; j >= 0; --j)
    if (!keep[j]) w = restrict_drop(w, j);
  return w;
}

// integral over the k-simplex of a k-form in normal form; Dirichlet formula
// with the chart orientation correction (-1)^k
template <class F>
F integrate_top(const Form<F>& w) {
  int k = w.n;
  uint32_t full = (k == 0) ? 0u : ((1u << k) - 1);
  auto it = w.comp.find(full);
  if (it == w.comp.end()) return F(0);
  F total(0);
  for (auto& [e, v] : it->second.c) {
    // int lambda^e over the chart simplex = prod e_i! / (k + sum e_i)!
    long s = 0;
    F num(1);
    for (int i = 0; i < k; ++i) {
      for (int t = 2; t <= e[i]; ++t) num *= field_traits<F>::from_int(t);
      s += e[i];
    }
    F den(1);
    for (long t = 2; t <= s + k; ++t) den *= field_traits<F>::from_int(t);
    total += v * num / den;
  }
  if (k & 1) total = -total;
  return total;
}

// --- Dupont cone contraction ----------------------------------------------

// t-graded polynomial: coefficient of t^a is a Poly
template <class F>
using TPoly = std::map<int, Poly<F>>;

template <class F>
TPoly<F> tpoly_mul(const TPoly<F>& a, const TPoly<F>& b) {
  TPoly<F> out;
  for (auto& [da, pa] : a)
    for (auto& [db, pb] : b) {
      Poly<F> p = pa * pb;
      if (p.is_zero()) continue;
      auto it = out.find(da + db);
      if (it == out.end()) out[da + db] = p;
      else it->second += p;
    }
  return out;
}

// pullback of a chart polynomial under the dilation toward vertex i:
// lambda_j -> t lambda_j + (1-t) delta_{ij}
template <class F>
TPoly<F> dilation_pullback(const Poly<F>& p, int i) {
  int n = p.nvar;
  TPoly<F> out;
  for (auto& [e, v] : p.c) {
    TPoly<F> term;
    term[0] = Poly<F>::constant(n, v);
    for (int j = 0; j < n; ++j) {
      if (e[j] == 0) continue;
      TPoly<F> fac;
      if (j == i) {
        // t lambda_j + 1 - t = 1 + t(lambda_j - 1)
        fac[0] = Poly<F>::constant(n, F(1));
        Poly<F> lm1 = Poly<F>::var(n, j);
        lm1 += Poly<F>::constant(n, F(-1));
        fac[1] = lm1;
      } else {
        fac[1] = Poly<F>::var(n, j);
      }
      for (int rep = 0; rep < e[j]; ++rep) term = tpoly_mul(term, fac);
    }
    for (auto& [d, q] : term) {
      auto it = out.find(d);
      if (it == out.end()) out[d] = q;
      else it->second += q;
    }
  }
  return out;
}

// cone contraction toward vertex i: h_i omega = int_0^1 (dt part of the
// dilation pullback); lowers form degree by one, h_i on functions is 0
template <class F>
Form<F> cone_h(const Form<F>& w, int i) {
  int n = w.n;
  Form<F> out{n, {}};
  for (auto& [m, p] : w.comp) {
    int k = __builtin_popcount(m);
    if (k == 0) continue;
    TPoly<F> tp = dilation_pullback(p, i);
    // phi* dlambda_s = t dlambda_s + (lambda_s - delta_{is}) dt; the dt part
    // of the wedge picks one factor's dt, the rest contribute t^{k-1}
    std::vector<int> S;
    for (int b = 0; b < n; ++b)
      if (m & (1u << b)) S.push_back(b);
    for (int pos = 0; pos < k; ++pos) {
      int s = S[pos];
      Poly<F> cs = Poly<F>::var(n, s);
      if (s == i) cs += Poly<F>::constant(n, F(-1));
      if (cs.is_zero()) continue;
      // sign: moving dt from slot pos to the front of the wedge
      F sgn = (pos & 1) ? F(-1) : F(1);
      uint32_t rest = m & ~(1u << s);
      for (auto& [a, q] : tp) {
        Poly<F> coef = q * cs;
        if (coef.is_zero()) continue;
        // integrate t^{a + k - 1} over [0,1]
        F inv = F(1) / field_traits<F>::from_int(a + k);
        out.add_term(rest, coef.scaled(sgn * inv));
      }
    }
  }
  out.prune();
  return out;
}

// evaluation at vertex i (the t=0 end of the dilation): scalar value of the
// 0-form part at lambda = e_i
template <class F>
F vertex_value(const Form<F>& w, int i) {
  auto it = w.comp.find(0u);
  if (it == w.comp.end()) return F(0);
  F total(0);
  for (auto& [e, v] : it->second.c) {
    bool live = true;
    for (int j = 0; j < w.n; ++j)
      if (e[j] > 0 && j != i) { live = false; break; }
    if (live) total += v;
  }
  return total;
}

}  // namespace cw
