#pragma once

// Finite dimensional dg algebra fixtures used across tests and the property
// suite: truncated graded-commutative monomial algebras, truncated free
// (word) algebras, and matrix algebras over the former.  All carry a weight
// grading (monomial length, plus column-minus-row for matrix parts) so that
// commutators with weighted degree 1 elements are nilpotent operators.

#include <map>
#include <random>
#include <string>
#include <vector>

#include "cw/ainf.hpp"

namespace cw {

template <class F>
struct AlgFixture {
  GradedSpacePtr sp;
  AInf<F> alg;  // m[1] = differential, m[2] = product
  std::vector<std::vector<int>> keys;          // flat list of basis keys
  std::map<std::vector<int>, std::pair<int, int>> index;  // key -> (degree, idx)

  Elt<F> monomial(const std::vector<int>& key, const F& c = F(1)) const {
    auto it = index.find(key);
    if (it == index.end()) throw std::invalid_argument("monomial: unknown basis key");
    Elt<F> e = Elt<F>::basis(sp, it->second.first, it->second.second);
    e *= c;
    return e;
  }
};

namespace detail {

template <class F>
struct AlgBuilder {
  std::vector<std::vector<int>> keys;                     // basis keys per flat order
  std::vector<int> degs, wts;                             // degree / weight per key
  std::map<std::vector<int>, int> flat;                   // key -> flat id

  int add(const std::vector<int>& key, int deg, int wt) {
    auto it = flat.find(key);
    if (it != flat.end()) return it->second;
    flat[key] = (int)keys.size();
    keys.push_back(key);
    degs.push_back(deg);
    wts.push_back(wt);
    return (int)keys.size() - 1;
  }

  // Assemble GradedSpace + index maps once all basis keys are known.
  AlgFixture<F> finish(
      const std::function<std::map<int, F>(int, int)>& mult,     // (flat a, flat b) -> flat -> coeff
      const std::function<std::map<int, F>(int)>& diff) const {  // flat -> flat -> coeff
    AlgFixture<F> fx;
    int topdeg = 0;
    for (int d : degs) topdeg = std::max(topdeg, d);
    auto gs = std::make_shared<GradedSpace>(std::vector<int>(topdeg + 1, 0));
    std::vector<std::pair<int, int>> where(keys.size());  // flat -> (deg, idx in deg)
    gs->labels.resize(topdeg + 1);
    for (size_t a = 0; a < keys.size(); ++a) {
      where[a] = {degs[a], gs->dims[degs[a]]++};
      std::string lbl;
      for (int v : keys[a]) lbl += (lbl.empty() ? "" : ".") + std::to_string(v);
      gs->labels[degs[a]].push_back(lbl);
    }
    fx.sp = gs;
    fx.keys = keys;
    for (size_t a = 0; a < keys.size(); ++a) fx.index[keys[a]] = where[a];
    AInf<F>& A = fx.alg;
    A.sp = gs;
    for (size_t a = 0; a < keys.size(); ++a) {
      auto& wrow = A.weights[where[a].first];
      if ((int)wrow.size() < gs->dims[where[a].first]) wrow.resize(gs->dims[where[a].first], 0);
      wrow[where[a].second] = wts[a];
    }
    A.m.resize(3);
    auto d_op = std::make_shared<TensorOp<F>>(gs, gs, 1, 1);
    for (size_t a = 0; a < keys.size(); ++a)
      for (auto& [b, c] : diff((int)a))
        d_op->add_entry({where[a].first, where[a].second}, where[b].second, c);
    A.m[1] = d_op;
    auto m_op = std::make_shared<TensorOp<F>>(gs, gs, 2, 2 - 2);
    for (size_t a = 0; a < keys.size(); ++a)
      for (size_t b = 0; b < keys.size(); ++b)
        for (auto& [cix, c] : mult((int)a, (int)b))
          m_op->add_entry({where[a].first, where[a].second, where[b].first, where[b].second},
                          where[cix].second, c);
    A.m[2] = m_op;
    return fx;
  }
};

}  // namespace detail

// Graded commutative monomial algebra on generators of given degrees.
// Even generators are truncated at power pow_cap, odd generators square to
// zero, and every monomial of total degree > deg_cap is set to zero.
// diff maps generator id -> list of (monomial exponent vector, coeff); it is
// extended by the Leibniz rule.  Caller is responsible for d^2 = 0 (automatic
// when only odd generators have nonzero differentials landing in even ones).
template <class F>
AlgFixture<F> comm_algebra(const std::vector<int>& gen_degs, int pow_cap, int deg_cap,
                           const std::map<int, std::vector<std::pair<std::vector<int>, F>>>& diff) {
  const int G = (int)gen_degs.size();
  detail::AlgBuilder<F> bld;
  // enumerate admissible exponent vectors
  std::vector<int> caps(G);
  for (int i = 0; i < G; ++i) caps[i] = (gen_degs[i] & 1) ? 1 : pow_cap;
  std::vector<int> e(G, 0);
  while (true) {
    int deg = 0, wt = 0;
    for (int i = 0; i < G; ++i) { deg += e[i] * gen_degs[i]; wt += e[i]; }
    if (deg <= deg_cap) bld.add(e, deg, wt);
    int i = G - 1;
    while (i >= 0 && e[i] == caps[i]) { e[i] = 0; --i; }
    if (i < 0) break;
    ++e[i];
  }
  auto key_deg = [&](const std::vector<int>& k) {
    int d = 0;
    for (int i = 0; i < G; ++i) d += k[i] * gen_degs[i];
    return d;
  };
  // multiply two monomials; returns (flat, coeff) or empty if zero
  auto mul_keys = [&bld, gen_degs, caps, deg_cap, G, key_deg](const std::vector<int>& a,
                                                             const std::vector<int>& b)
      -> std::map<int, F> {
    std::vector<int> c(G);
    for (int i = 0; i < G; ++i) {
      c[i] = a[i] + b[i];
      if (c[i] > caps[i]) return {};
    }
    if (key_deg(c) > deg_cap) return {};
    // Koszul sign: move each odd generator of b past the odd generators of a
    // with larger index.
    int flips = 0;
    for (int i = 0; i < G; ++i) {
      if (!(gen_degs[i] & 1) || b[i] == 0) continue;
      for (int j = i + 1; j < G; ++j)
        if ((gen_degs[j] & 1) && a[j]) ++flips;
    }
    auto it = bld.flat.find(c);
    if (it == bld.flat.end()) return {};
    return {{it->second, (flips & 1) ? F(-1) : F(1)}};
  };
  auto mult = [mul_keys, &bld](int a, int b) { return mul_keys(bld.keys[a], bld.keys[b]); };
  // differential by Leibniz over an explicit factor sequence
  auto diff_fn = [&bld, gen_degs, diff, G, mul_keys](int a) -> std::map<int, F> {
    const std::vector<int>& e = bld.keys[a];
    std::map<int, F> out;
    int prefix_deg = 0;
    for (int i = 0; i < G; ++i) {
      auto dit = diff.find(i);
      if (dit != diff.end() && e[i] > 0) {
        // d hits one of the e[i] copies of generator i; all copies give the
        // same term up to the even/odd bookkeeping (odd gens have e[i] <= 1,
        // for even gens the factor copies commute freely).
        std::vector<int> rest = e;
        rest[i] -= 1;
        for (auto& [mon, c] : dit->second) {
          // assemble rest * mon with sign for moving d past the prefix
          // (generators of index < i plus the copies of i before the hit one;
          // for even gens those are even, no sign; count odd prefix degrees)
          int predeg = prefix_deg;  // degree of generators strictly before i
          // copies of generator i before the struck one: even case only,
          // contributes even degree, no sign; odd case e[i] = 1, none before.
          F coeff = c * F(e[i]);  // e[i] identical choices for even gens (1 for odd)
          if (predeg & 1) coeff = -coeff;
          // move d(g_i) (the element mon) back into canonical order: the
          // product routine handles the reordering sign.
          auto it1 = bld.flat.find(rest);
          // rest might itself have dropped below caps; it is always valid.
          if (it1 == bld.flat.end()) continue;
          auto mit = bld.flat.find(mon);
          if (mit == bld.flat.end()) continue;
          // sign from moving mon past the generators of rest with index > i:
          // use the product in the order (prefix .. g_i-part) * mon * (suffix)
          // = (rest-with-layout) ... easier: rest * mon needs mon moved past
          // the suffix of rest (indices > i).
          int mondeg = 0;
          for (int t = 0; t < G; ++t) mondeg += mon[t] * gen_degs[t];
          int sufdeg = 0;
          for (int t = i; t < G; ++t) sufdeg += rest[t] * gen_degs[t];
          if ((mondeg & 1) && (sufdeg & 1)) coeff = -coeff;
          for (auto& [fl, mc] : mul_keys(rest, bld.keys[mit->second]))
            out[fl] += coeff * mc;
        }
      }
      prefix_deg += e[i] * gen_degs[i];
    }
    for (auto it = out.begin(); it != out.end();)
      it = field_traits<F>::is_zero(it->second) ? out.erase(it) : std::next(it);
    return out;
  };
  return bld.finish(mult, diff_fn);
}

// Truncated free algebra: basis are words over the generators with length at
// most max_len; any word containing one of the killed words as a contiguous
// subword is zero, as is any word longer than max_len.  No commutation signs:
// words are the basis, the product is concatenation.
template <class F>
AlgFixture<F> word_algebra(const std::vector<int>& gen_degs, int max_len,
                           const std::vector<std::vector<int>>& killed,
                           const std::map<int, std::vector<std::pair<std::vector<int>, F>>>& diff) {
  const int G = (int)gen_degs.size();
  auto contains_killed = [&killed](const std::vector<int>& w) {
    for (auto& k : killed) {
      if (k.size() > w.size()) continue;
      for (size_t at = 0; at + k.size() <= w.size(); ++at) {
        bool hit = true;
        for (size_t t = 0; t < k.size(); ++t)
          if (w[at + t] != k[t]) { hit = false; break; }
        if (hit) return true;
      }
    }
    return false;
  };
  detail::AlgBuilder<F> bld;
  // enumerate words breadth-first
  std::vector<std::vector<int>> frontier = {{}};
  bld.add({}, 0, 0);
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<int>> next;
    for (auto& w : frontier)
      for (int g = 0; g < G; ++g) {
        std::vector<int> w2 = w;
        w2.push_back(g);
        if (contains_killed(w2)) continue;
        int deg = 0;
        for (int x : w2) deg += gen_degs[x];
        bld.add(w2, deg, (int)w2.size());
        next.push_back(w2);
      }
    frontier = std::move(next);
  }
  auto mult = [&bld, contains_killed, max_len](int a, int b) -> std::map<int, F> {
    std::vector<int> w = bld.keys[a];
    w.insert(w.end(), bld.keys[b].begin(), bld.keys[b].end());
    if ((int)w.size() > max_len || contains_killed(w)) return {};
    auto it = bld.flat.find(w);
    if (it == bld.flat.end()) return {};
    return {{it->second, F(1)}};
  };
  auto diff_fn = [&bld, gen_degs, diff, contains_killed, max_len](int a) -> std::map<int, F> {
    const std::vector<int>& w = bld.keys[a];
    std::map<int, F> out;
    int prefix_deg = 0;
    for (size_t i = 0; i < w.size(); ++i) {
      auto dit = diff.find(w[i]);
      if (dit != diff.end()) {
        for (auto& [mon, c] : dit->second) {
          std::vector<int> w2(w.begin(), w.begin() + i);
          w2.insert(w2.end(), mon.begin(), mon.end());
          w2.insert(w2.end(), w.begin() + i + 1, w.end());
          if ((int)w2.size() > max_len || contains_killed(w2)) continue;
          auto it = bld.flat.find(w2);
          if (it == bld.flat.end()) continue;
          F coeff = c;
          if (prefix_deg & 1) coeff = -coeff;
          out[it->second] += coeff;
        }
      }
      prefix_deg += gen_degs[w[i]];
    }
    for (auto it = out.begin(); it != out.end();)
      it = field_traits<F>::is_zero(it->second) ? out.erase(it) : std::next(it);
    return out;
  };
  return bld.finish(mult, diff_fn);
}

// Matrix algebra over a fixture: basis key = base key + {row, col}.
// Weight gains (col - row), which makes commutators with strictly upper
// triangular degree 1 elements weight-raising.
template <class F>
AlgFixture<F> matrix_algebra(const AlgFixture<F>& base, int l) {
  detail::AlgBuilder<F> bld;
  const AInf<F>& A = base.alg;
  for (size_t a = 0; a < base.keys.size(); ++a) {
    auto [deg, idx] = base.index.at(base.keys[a]);
    int wt = A.weights.count(deg) ? A.weights.at(deg)[idx] : 0;
    for (int r = 0; r < l; ++r)
      for (int c = 0; c < l; ++c) {
        std::vector<int> key = base.keys[a];
        key.push_back(-1);  // separator so base keys cannot collide
        key.push_back(r);
        key.push_back(c);
        bld.add(key, deg, wt + (c - r));
      }
  }
  auto base_part = [](const std::vector<int>& key) {
    return std::vector<int>(key.begin(), key.end() - 3);
  };
  const auto* basep = &base;
  auto mult = [&bld, basep, base_part](int a, int b) -> std::map<int, F> {
    const auto& ka = bld.keys[a];
    const auto& kb = bld.keys[b];
    int ra = ka[ka.size() - 2], ca = ka.back();
    int rb = kb[kb.size() - 2], cb = kb.back();
    if (ca != rb) return {};
    auto [da, ia] = basep->index.at(base_part(ka));
    auto [db, ib] = basep->index.at(base_part(kb));
    Elt<F> prod = basep->alg.op(2)->apply({Elt<F>::basis(basep->sp, da, ia),
                                           Elt<F>::basis(basep->sp, db, ib)});
    std::map<int, F> out;
    for (auto& [p, v] : prod.comp)
      for (int j = 0; j < (int)v.size(); ++j) {
        if (field_traits<F>::is_zero(v[j])) continue;
        std::vector<int> key = basep->keys.front();  // placeholder, replaced below
        // reconstruct base key of (p, j)
        for (auto& [k2, di] : basep->index)
          if (di.first == p && di.second == j) { key = k2; break; }
        key.push_back(-1);
        key.push_back(ra);
        key.push_back(cb);
        auto it = bld.flat.find(key);
        if (it != bld.flat.end()) out[it->second] += v[j];
      }
    return out;
  };
  auto diff_fn = [&bld, basep, base_part](int a) -> std::map<int, F> {
    const auto& ka = bld.keys[a];
    int ra = ka[ka.size() - 2], ca = ka.back();
    auto [da, ia] = basep->index.at(base_part(ka));
    Elt<F> dx = basep->alg.op(1)->apply({Elt<F>::basis(basep->sp, da, ia)});
    std::map<int, F> out;
    for (auto& [p, v] : dx.comp)
      for (int j = 0; j < (int)v.size(); ++j) {
        if (field_traits<F>::is_zero(v[j])) continue;
        std::vector<int> key;
        for (auto& [k2, di] : basep->index)
          if (di.first == p && di.second == j) { key = k2; break; }
        key.push_back(-1);
        key.push_back(ra);
        key.push_back(ca);
        auto it = bld.flat.find(key);
        if (it != bld.flat.end()) out[it->second] += v[j];
      }
    return out;
  };
  return bld.finish(mult, diff_fn);
}

// --- randomization helpers -------------------------------------------------

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(uint64_t seed) : eng(seed) {}
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
  template <class F>
  F scalar(int num_range = 3, int den_range = 3) {
    int num = uniform(-num_range, num_range);
    if constexpr (field_traits<F>::exact) {
      int den = uniform(1, den_range);
      return F(num) / F(den);
    } else {
      return F(field_traits<F>::from_int(num));
    }
  }
};

}  // namespace cw
