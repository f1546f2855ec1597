#include <doctest.h>

#include <map>
#include <random>
#include <vector>

#include "cw/chern.hpp"
#include "cw/fixtures.hpp"
#include "cw/transfer.hpp"

using namespace cw;

namespace {

// One-dimensional even degrees 0..topdeg with pseudo-random structure
// constants: enough to exercise the tree sum and the recursion on every
// composition pattern, without needing the Stasheff identities (the
// trees/recursion agreement is purely combinatorial).
AInf<Rat> hash_even_ops(uint64_t seed, int cap, int topdeg) {
  std::vector<int> dims(topdeg + 1, 0);
  for (int p = 0; p <= topdeg; p += 2) dims[p] = 1;
  auto sp = std::make_shared<GradedSpace>(dims);
  AInf<Rat> S;
  S.sp = sp;
  S.m.resize(cap + 1);
  auto coef = [seed](int k, const std::vector<int>& degs) -> long {
    uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (uint64_t)(k + 1));
    for (int d : degs) x = (x ^ (uint64_t)(d + 3)) * 0x100000001b3ULL;
    x ^= x >> 31;
    return (long)(x % 7) - 3;
  };
  long c0 = coef(0, {});
  if (c0 == 0) c0 = 1;  // keep the curvature nonzero for every seed
  S.m[0] = std::make_shared<LambdaOp<Rat>>(sp, sp, 0, 2, [sp, c0](const std::vector<Elt<Rat>>&) {
    Elt<Rat> e = Elt<Rat>::basis(sp, 2, 0);
    e *= Rat(c0);
    return e;
  });
  for (int k = 2; k <= cap; k += 2) {
    S.m[k] = std::make_shared<LambdaOp<Rat>>(
        sp, sp, k, 2 - k, [sp, coef, k, topdeg](const std::vector<Elt<Rat>>& xs) {
          int q = 2 - k;
          Rat c(1);
          std::vector<int> degs;
          for (auto& x : xs) {
            if (x.is_zero()) return Elt<Rat>(sp);
            int p = x.degree();
            q += p;
            degs.push_back(p);
            c *= x.coeff(p, 0);
          }
          if (q < 0 || q > topdeg) return Elt<Rat>(sp);
          Elt<Rat> e = Elt<Rat>::basis(sp, q, 0);
          Rat cc = Rat(coef(k, degs));
          cc *= c;
          e *= cc;
          return e;
        });
  }
  return S;
}

// Exterior algebra on two odd generators x, y with d y = x y; deformed by
// gamma = y it becomes a 4-dimensional curved dg algebra with m_0 = x y.
AlgFixture<Rat> xy_fixture() {
  std::map<int, std::vector<std::pair<std::vector<int>, Rat>>> diff;
  diff[1] = {{{1, 1}, Rat(1)}};  // d y = x y
  return comm_algebra<Rat>({1, 1}, 1, 2, diff);
}

// Exterior algebra on x, y, z, w (all odd) with d y = x y and d w = z w.
AlgFixture<Rat> xyzw_fixture() {
  std::map<int, std::vector<std::pair<std::vector<int>, Rat>>> diff;
  diff[1] = {{{1, 1, 0, 0}, Rat(1)}};  // d y = x y
  diff[3] = {{{0, 0, 1, 1}, Rat(1)}};  // d w = z w
  return comm_algebra<Rat>({1, 1, 1, 1}, 1, 4, diff);
}

MultiOpPtr<Rat> random_tensor_op(GradedSpacePtr sp, int arity, int shift, std::mt19937& rng) {
  auto op = std::make_shared<TensorOp<Rat>>(sp, sp, arity, shift);
  std::uniform_int_distribution<int> c(-2, 2);
  for (auto& tup : basis_tuples(*sp, arity)) {
    int q = shift;
    std::vector<int> key;
    for (auto& [p, j] : tup) {
      q += p;
      key.push_back(p);
      key.push_back(j);
    }
    if (q < 0 || q > sp->top_degree()) continue;
    for (int oi = 0; oi < sp->dim(q); ++oi) {
      int v = c(rng);
      if (v) op->add_entry(key, oi, Rat(v));
    }
  }
  return op;
}

// Morphism data with identity F_1 and random odd components F_3, F_5 out of
// the deformed xy algebra; the target structure is filled in by transport.
AInfMorphism<Rat> transported_morphism(uint64_t seed, int arity_max) {
  auto fx = xy_fixture();
  Elt<Rat> gamma = fx.monomial({0, 1});
  AInfMorphism<Rat> Fm;
  Fm.src = deform_curved_dg(fx.alg, gamma);
  Fm.comp.resize(6);
  Fm.comp[1] = std::make_shared<LambdaOp<Rat>>(
      fx.sp, fx.sp, 1, 0, [](const std::vector<Elt<Rat>>& xs) { return xs[0]; });
  std::mt19937 rng((unsigned)seed);
  Fm.comp[3] = random_tensor_op(fx.sp, 3, -2, rng);
  Fm.comp[5] = random_tensor_op(fx.sp, 5, -4, rng);
  transport_structure(Fm, arity_max);
  Fm.src.m.resize(arity_max + 1);  // explicit zero entries so pre_chern reaches n = 4
  return Fm;
}

// trace of the matrix factor of a matrix_algebra fixture, as a linear map
// onto the base fixture
LinMap<Rat> matrix_trace_map(const AlgFixture<Rat>& mat, const AlgFixture<Rat>& base) {
  LinMap<Rat> tr(mat.sp, base.sp, 0);
  for (auto& [key, di] : mat.index) {
    int r = key[key.size() - 2], c = key.back();
    if (r != c) continue;
    std::vector<int> bkey(key.begin(), key.end() - 3);
    auto [bp, bj] = base.index.at(bkey);
    tr.at(di.first, bj, di.second) += Rat(1);
  }
  return tr;
}

}  // namespace

TEST_CASE("pre-Chern elements: low examples and the two computation paths") {
  auto S = hash_even_ops(11, 8, 12);
  auto pc = pre_chern(S, 3, PreChernPath::trees);
  // CW_1 = m_0 and CW_2 = m_2(m_0, m_0)
  CHECK(pc.cw[0].equals(S.curvature()));
  CHECK(pc.cw[1].equals(S.op(2)->apply({S.curvature(), S.curvature()})));
  // CW_3 = m_2(CW_2, m_0) + m_2(m_0, CW_2) + m_4(m_0, m_0, m_0, m_0)
  Elt<Rat> want = S.op(2)->apply({pc.cw[1], pc.cw[0]});
  want += S.op(2)->apply({pc.cw[0], pc.cw[1]});
  want += S.op(4)->apply({pc.cw[0], pc.cw[0], pc.cw[0], pc.cw[0]});
  CHECK(pc.cw[2].equals(want));

  SUBCASE("trees agree with the recursion up to n = 5 at arity 8") {
    for (uint64_t seed : {1u, 7u, 42u}) {
      auto R = hash_even_ops(seed, 8, 12);
      auto a = pre_chern(R, 5, PreChernPath::trees);
      auto b = pre_chern(R, 5, PreChernPath::recursion);
      bool nonzero = false;
      for (int n = 1; n <= 5; ++n) {
        CHECK(a.cw[n - 1].equals(b.cw[n - 1]));
        if (!a.cw[n - 1].is_zero()) {
          nonzero = true;
          CHECK(a.cw[n - 1].degree() == 2 * n);
        }
      }
      CHECK(nonzero);
    }
  }
  SUBCASE("arity cap below 2N-2 is rejected") {
    auto R = hash_even_ops(3, 2, 8);
    CHECK_THROWS_AS(pre_chern(R, 3), std::invalid_argument);
    CHECK_NOTHROW(pre_chern(R, 2));
  }
}

TEST_CASE("odd identity on curved dg and on a transported curved structure") {
  SUBCASE("matrix curved dg algebra, n <= 4") {
    std::map<int, std::vector<std::pair<std::vector<int>, Rat>>> diff;
    diff[1] = {{{1, 0}, Rat(1)}};  // d v = u
    auto base = comm_algebra<Rat>({2, 1}, 2, 5, diff);
    auto mat = matrix_algebra(base, 2);
    Elt<Rat> gamma =
        mat.monomial({0, 1, -1, 0, 0}) + mat.monomial({0, 1, -1, 0, 1});  // v (E_00 + E_01)
    auto S = deform_curved_dg(mat.alg, gamma);
    S.m.resize(7);  // extend with zero operations so pre_chern reaches n = 4
    auto rep = verify_odd_identity(S, 4);
    INFO(rep.first_failure);
    CHECK(rep.pass);
    // not vacuous: CW_2 = m_0^2 = u^2 (E_00 + E_01) is nonzero
    auto pc = pre_chern(S, 2);
    CHECK_FALSE(pc.cw[1].is_zero());
  }
  SUBCASE("random transported curved structures, n <= 4") {
    for (uint64_t seed : {2u, 19u}) {
      auto Fm = transported_morphism(seed, 6);
      {
        auto rep = verify_morphism(Fm, 3);
        INFO(rep.first_failure);
        REQUIRE(rep.pass);
      }
      {
        auto rep = check_stasheff(Fm.dst, 3);
        INFO(rep.first_failure);
        REQUIRE(rep.pass);
      }
      auto rep = verify_odd_identity(Fm.dst, 4);
      INFO(rep.first_failure);
      CHECK(rep.pass);
    }
  }
}

TEST_CASE("pre-Chern transfer law along odd-component morphisms") {
  for (uint64_t seed : {5u, 23u, 71u}) {
    auto Fm = transported_morphism(seed, 6);
    auto rep = verify_even_transfer(Fm, 3);
    INFO(rep.first_failure);
    CHECK(rep.pass);
    // an even component, even a zero-filled one, is rejected up front
    AInfMorphism<Rat> bad = Fm;
    std::mt19937 rng(9);
    bad.comp[2] = random_tensor_op(Fm.src.sp, 2, -1, rng);
    CHECK_THROWS_AS(verify_even_transfer(bad, 2), std::invalid_argument);
  }
}

TEST_CASE("Chern-Weil triples: trace passes, a non-trace map fails") {
  // 2x2 matrices in every degree 0..6, with m_3(x, y, z) = x u y z - x y u z
  // for a fixed matrix u.  Each individual trace is nonzero, but the
  // symmetrized sum cancels through cyclic invariance.
  auto sp = std::make_shared<GradedSpace>(std::vector<int>(7, 4));
  auto csp = std::make_shared<GradedSpace>(std::vector<int>(7, 1));
  auto mmul = [](const std::vector<Rat>& a, const std::vector<Rat>& b) {
    std::vector<Rat> c(4, Rat(0));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) c[2 * i + j] += a[2 * i + k] * b[2 * k + j];
    return c;
  };
  std::vector<Rat> u = {Rat(1), Rat(2), Rat(0), Rat(-1)};
  auto as_mat = [](const Elt<Rat>& x) {
    std::vector<Rat> m(4, Rat(0));
    for (auto& [p, v] : x.comp)
      for (int j = 0; j < 4; ++j) m[j] += v[j];
    return m;
  };
  auto m3 = std::make_shared<LambdaOp<Rat>>(
      sp, sp, 3, -1, [sp, u, mmul, as_mat](const std::vector<Elt<Rat>>& xs) {
        int q = -1;
        for (auto& x : xs) {
          if (x.is_zero()) return Elt<Rat>(sp);
          q += x.degree();
        }
        if (q < 0 || q > sp->top_degree()) return Elt<Rat>(sp);
        auto a = as_mat(xs[0]), b = as_mat(xs[1]), c = as_mat(xs[2]);
        auto lhs = mmul(mmul(mmul(a, u), b), c);
        auto rhs = mmul(mmul(mmul(a, b), u), c);
        Elt<Rat> out(sp);
        for (int j = 0; j < 4; ++j) out.add_to(q, j, lhs[j] - rhs[j]);
        out.prune();
        return out;
      });
  ChernWeilTriple<Rat> T;
  T.A.sp = sp;
  T.A.m.resize(4);
  T.A.m[3] = m3;
  T.C.sp = csp;
  T.C.d = LinMap<Rat>::zero(csp, csp, 1);
  T.phi = LinMap<Rat>(sp, csp, 0);
  for (int p = 0; p <= 6; ++p) {
    T.phi.at(p, 0, 0) = Rat(1);  // entry (0,0)
    T.phi.at(p, 0, 3) = Rat(1);  // entry (1,1)
  }
  std::mt19937 rng(4);
  std::uniform_int_distribution<int> cd(-3, 3);
  std::vector<std::vector<Elt<Rat>>> probes;
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<Elt<Rat>> tup;
    for (int i = 0; i < 3; ++i) {
      Elt<Rat> x(sp);
      int p = 2 * (rep % 3);
      for (int j = 0; j < 4; ++j) x.add_to(p, j, Rat(cd(rng)));
      tup.push_back(x);
    }
    probes.push_back(tup);
  }
  auto rep = verify_triple(T, probes);
  INFO(rep.first_failure);
  CHECK(rep.pass);
  // not vacuous: individual summands have nonzero trace
  bool nonvac = false;
  for (auto& tup : probes)
    if (!T.phi.apply(m3->apply(tup)).is_zero()) nonvac = true;
  CHECK(nonvac);
  // a coordinate projection lacks cyclic invariance and fails (ii)
  ChernWeilTriple<Rat> bad = T;
  bad.phi = LinMap<Rat>(sp, csp, 0);
  for (int p = 0; p <= 6; ++p) bad.phi.at(p, 0, 0) = Rat(1);
  CHECK_FALSE(verify_triple(bad, probes).pass);
  // the zero map passes trivially
  ChernWeilTriple<Rat> triv = T;
  triv.phi = LinMap<Rat>::zero(sp, csp, 0);
  CHECK(verify_triple(triv, probes).pass);
  // odd-degree probe arguments are rejected
  std::vector<std::vector<Elt<Rat>>> badprobe = {
      {Elt<Rat>::basis(sp, 1, 0), Elt<Rat>::basis(sp, 2, 0), Elt<Rat>::basis(sp, 2, 1)}};
  CHECK_THROWS_AS(verify_triple(T, badprobe), std::invalid_argument);
}

TEST_CASE("Chern cocycles and character on a matrix curved dg triple") {
  std::map<int, std::vector<std::pair<std::vector<int>, Rat>>> diff;
  diff[1] = {{{1, 0}, Rat(1)}};  // d v = u
  auto base = comm_algebra<Rat>({2, 1}, 3, 7, diff);
  auto mat = matrix_algebra(base, 2);
  Elt<Rat> gamma = mat.monomial({0, 1, -1, 0, 0}) + mat.monomial({0, 1, -1, 0, 1});
  ChernWeilTriple<Rat> T;
  T.A = deform_curved_dg(mat.alg, gamma);
  T.C.sp = base.sp;
  T.C.d = to_linmap(*base.alg.op(1));
  T.phi = matrix_trace_map(mat, base);
  REQUIRE(T.C.d_squared_zero());
  {
    auto rep = verify_triple(T);
    INFO(rep.first_failure);
    REQUIRE(rep.pass);
  }
  T.A.m.resize(5);  // zero m_3, m_4 so N = 3 is reachable
  auto cc = chern_cocycles(T, 3);
  INFO(cc.cert.first_failure);
  CHECK(cc.cert.pass);
  // C_1 = Tr(m_0) = u is nonzero and closed; C_2 = Tr(m_0^2) = u^2
  CHECK(cc.c[0].equals(base.monomial({1, 0})));
  CHECK(cc.c[1].equals(base.monomial({2, 0})));
  CHECK(is_cocycle(T.C, cc.c[2]));
  // associative input: Ch_n = Tr(m_0^n)/n!, the Catalan factor cancels
  auto ch = chern_character(T, 3);
  CHECK(ch[0].equals(cc.c[0]));
  Rat half(1);
  half /= Rat(2);
  CHECK(ch[1].equals(half * cc.c[1]));
  // CW_3 is twice m_0^3 (two binary trees, m_4 = 0); after dividing by
  // 3! c_2 = 12 the character is Tr(m_0^3)/3!
  Elt<Rat> m0cube =
      T.phi.apply(T.A.op(2)->apply({T.A.op(2)->apply({T.A.curvature(), T.A.curvature()}),
                                    T.A.curvature()}));
  CHECK_FALSE(m0cube.is_zero());
  CHECK(cc.c[2].equals(Rat(2) * m0cube));
  Rat sixth(1);
  sixth /= Rat(6);
  CHECK(ch[2].equals(sixth * m0cube));
  // under associativity every binary tree evaluates to the same power of m_0
  for (int n = 2; n <= 4; ++n) {
    auto bts = enum_binary(n);
    REQUIRE((long)bts.size() == catalan(n - 1));
    Elt<Rat> first = eval_tree(T.A, bts[0]);
    for (auto& t : bts) CHECK(eval_tree(T.A, t).equals(first));
  }
}

TEST_CASE("Chern cocycles on a transferred matrix structure") {
  // transfer the curved dg structure on 2x2 matrices over the uv algebra to
  // its cohomology; the trace triple certifies d C_n = 0 for n <= 3 there
  std::map<int, std::vector<std::pair<std::vector<int>, Rat>>> diff;
  diff[1] = {{{1, 0, 0, 0}, Rat(1)}};  // d v = u; b, w closed
  auto base = comm_algebra<Rat>({2, 1, 2, 1}, 2, 5, diff);
  auto cbase = harmonic_contraction(base.sp, to_linmap(*base.alg.op(1)), &base.alg.weights);
  auto mat = matrix_algebra(base, 2);
  auto ec = matrix_contraction(base, mat, cbase, 2);
  // traceless connection gamma = v E_01
  Elt<Rat> gamma = mat.monomial({0, 1, 0, 0, -1, 0, 1});
  auto tr = transfer_curved_dg_trees(mat.alg, gamma, ec.c, 4, 24);
  {
    auto rep = check_stasheff(tr.B, 3, -1, 0.0, 1000);
    INFO(rep.first_failure);
    REQUIRE(rep.pass);
  }
  ChernWeilTriple<Rat> T;
  T.A = tr.B;
  T.C.sp = ec.base_small;
  T.C.d = LinMap<Rat>::zero(ec.base_small, ec.base_small, 1);
  T.phi = LinMap<Rat>(ec.c.small, ec.base_small, 0);
  for (int p = 0; p <= ec.c.small->top_degree(); ++p)
    for (int j = 0; j < ec.c.small->dim(p); ++j) {
      Elt<Rat> t = ec.trace(Elt<Rat>::basis(ec.c.small, p, j));
      for (auto& [q, v] : t.comp)
        for (int jj = 0; jj < (int)v.size(); ++jj)
          if (!field_traits<Rat>::is_zero(v[jj])) T.phi.at(p, jj, j) += v[jj];
    }
  {
    auto rep = verify_triple(T);
    INFO(rep.first_failure);
    CHECK(rep.pass);
  }
  auto cc = chern_cocycles(T, 3);
  INFO(cc.cert.first_failure);
  CHECK(cc.cert.pass);
}

TEST_CASE("connection independence on the four-generator exterior algebra") {
  auto fx = xyzw_fixture();
  ChainComplex<Rat> C{fx.sp, to_linmap(*fx.alg.op(1))};
  REQUIRE(C.d_squared_zero());
  LinMap<Rat> phi = LinMap<Rat>::identity(fx.sp);
  Elt<Rat> g1 = fx.monomial({0, 1, 0, 0}) + fx.monomial({0, 0, 0, 1});  // y + w
  Elt<Rat> g0(fx.sp);

  SUBCASE("equal connections give equal cocycles") {
    ChernWeilTriple<Rat> T1{deform_ainf(fx.alg, g1, 3), C, phi};
    auto a = chern_cocycles(T1, 2);
    auto b = chern_cocycles(T1, 2);
    CHECK(a.c[0].equals(b.c[0]));
    CHECK(a.c[1].equals(b.c[1]));
    CHECK_FALSE(a.c[1].is_zero());  // (xy + zw)^2 = 2 xyzw
    auto rep = connection_independence(fx.alg, C, phi, g1, g1, 3);
    INFO(rep.first_failure);
    CHECK(rep.pass);
  }
  SUBCASE("nilpotent connection against zero: classes cohomologous to 0") {
    auto rep = connection_independence(fx.alg, C, phi, g1, g0, 3);
    INFO(rep.first_failure);
    CHECK(rep.pass);
  }
  SUBCASE("random connection pairs") {
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> cd(-2, 2);
    for (int trial = 0; trial < 20; ++trial) {
      Elt<Rat> a(fx.sp), b(fx.sp);
      for (int j = 0; j < fx.sp->dim(1); ++j) {
        a.add_to(1, j, Rat(cd(rng)));
        b.add_to(1, j, Rat(cd(rng)));
      }
      auto rep = connection_independence(fx.alg, C, phi, a, b, 3);
      INFO(rep.first_failure);
      CHECK(rep.pass);
    }
  }
  SUBCASE("a curved base structure is rejected") {
    AInf<Rat> curved = fx.alg;
    Elt<Rat> c0 = fx.monomial({1, 1, 0, 0});
    curved.m[0] = std::make_shared<LambdaOp<Rat>>(
        fx.sp, fx.sp, 0, 2, [c0](const std::vector<Elt<Rat>>&) { return c0; });
    CHECK_THROWS_AS(connection_independence(curved, C, phi, g1, g0, 3), std::invalid_argument);
  }
}

TEST_CASE("naturality along a strict projection and the identity") {
  auto big = xyzw_fixture();
  auto small = xy_fixture();
  Elt<Rat> gbig = big.monomial({0, 1, 0, 0}) + big.monomial({0, 0, 0, 1});
  Elt<Rat> gsmall = small.monomial({0, 1});
  AInfMorphism<Rat> Fm;
  Fm.src = deform_curved_dg(big.alg, gbig);
  Fm.dst = deform_curved_dg(small.alg, gsmall);
  // F_1: the algebra projection killing z and w
  LinMap<Rat> proj(big.sp, small.sp, 0);
  for (auto& [key, di] : big.index) {
    if (key[2] != 0 || key[3] != 0) continue;
    auto [p, j] = small.index.at(std::vector<int>{key[0], key[1]});
    proj.at(di.first, j, di.second) += Rat(1);
  }
  Fm.comp.resize(2);
  Fm.comp[1] = std::make_shared<LambdaOp<Rat>>(
      big.sp, small.sp, 1, 0,
      [proj](const std::vector<Elt<Rat>>& xs) { return proj.apply(xs[0]); });
  {
    auto rep = verify_morphism(Fm, 2);
    INFO(rep.first_failure);
    REQUIRE(rep.pass);
  }
  ChernWeilTriple<Rat> TA{Fm.src, {big.sp, to_linmap(*big.alg.op(1))}, LinMap<Rat>::identity(big.sp)};
  ChernWeilTriple<Rat> TB{Fm.dst, {small.sp, to_linmap(*small.alg.op(1))},
                          LinMap<Rat>::identity(small.sp)};
  auto rep = naturality_check(Fm, proj, TA, TB, 2);
  INFO(rep.first_failure);
  CHECK(rep.pass);
  // identity morphism is a trivial pass
  auto idm = AInfMorphism<Rat>::identity(TA.A);
  auto rep2 = naturality_check(idm, LinMap<Rat>::identity(big.sp), TA, TA, 2);
  INFO(rep2.first_failure);
  CHECK(rep2.pass);
}
