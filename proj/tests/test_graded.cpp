#include <doctest.h>

#include "cw/ainf.hpp"
#include "cw/graded.hpp"
#include "cw/linalg.hpp"
#include "cw/scalar.hpp"

using namespace cw;

TEST_CASE("elt arithmetic and degrees") {
  auto sp = std::make_shared<GradedSpace>(std::vector<int>{2, 3, 1});
  auto e = Elt<Rat>::basis(sp, 1, 2);
  CHECK(e.degree() == 1);
  CHECK(e.is_homogeneous());
  auto f = Elt<Rat>::basis(sp, 0, 1);
  auto g = e + f;
  CHECK_FALSE(g.is_homogeneous());
  CHECK_THROWS(g.degree());
  g -= f;
  g.prune();
  CHECK(g.equals(e));
  g *= Rat(0);
  g.prune();
  CHECK(g.is_zero());
  CHECK(g.degree() == -1);
}

TEST_CASE("linmap compose and apply") {
  auto sp = std::make_shared<GradedSpace>(std::vector<int>{1, 2, 1});
  LinMap<Rat> d(sp, sp, 1);
  // d e(0,0) = e(1,0) + e(1,1); d e(1,0) = e(2,0); d e(1,1) = -e(2,0)
  d.at(0, 0, 0) = 1;
  d.at(0, 1, 0) = 1;
  d.at(1, 0, 0) = 1;
  d.at(1, 0, 1) = -1;
  CHECK(d.compose(d).is_zero());
  auto x = Elt<Rat>::basis(sp, 0, 0);
  auto dx = d.apply(x);
  CHECK(dx.degree() == 1);
  CHECK(dx.coeff(1, 0) == 1);
  CHECK(dx.coeff(1, 1) == 1);
  auto id = LinMap<Rat>::identity(sp);
  CHECK((id.compose(d) - d).is_zero());
  CHECK((d.compose(id) - d).is_zero());
}

TEST_CASE("solve_linear over rationals") {
  Mat<Rat> a = {{1, 2}, {3, 4}};
  auto z = solve_linear<Rat>(a, {Rat(5), Rat(11)});
  REQUIRE(z.has_value());
  CHECK((*z)[0] * 1 + (*z)[1] * 2 == 5);
  CHECK((*z)[0] * 3 + (*z)[1] * 4 == 11);
  // inconsistent system
  Mat<Rat> b = {{1, 1}, {2, 2}};
  CHECK_FALSE(solve_linear<Rat>(b, {Rat(1), Rat(3)}).has_value());
  // underdetermined but consistent
  CHECK(solve_linear<Rat>(b, {Rat(1), Rat(2)}).has_value());
  CHECK(rank<Rat>(a) == 2);
  CHECK(rank<Rat>(b) == 1);
}

TEST_CASE("cohomologous on the simplicial circle") {
  // triangle as a circle: C^0 = functions on 3 vertices, C^1 = functions on
  // the edges (01), (12), (20); (d f)(i j) = f(j) - f(i).
  auto sp = std::make_shared<GradedSpace>(std::vector<int>{3, 3});
  ChainComplex<Rat> C;
  C.sp = sp;
  C.d = LinMap<Rat>(sp, sp, 1);
  int edges[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  for (int e = 0; e < 3; ++e) {
    C.d.at(0, e, edges[e][1]) += 1;
    C.d.at(0, e, edges[e][0]) -= 1;
  }
  CHECK(C.d_squared_zero());
  auto e0 = Elt<Rat>::basis(sp, 1, 0);
  auto e1 = Elt<Rat>::basis(sp, 1, 1);
  // every 1-cochain is a cocycle; classes are detected by the total sum
  CHECK(is_cocycle(C, e0));
  CHECK(cohomologous(C, e0, e1));        // both have total weight 1
  CHECK_FALSE(cohomologous(C, e0, Rat(2) * e0));
  auto v = Elt<Rat>::basis(sp, 0, 0);
  CHECK(cohomologous(C, e0 - e1, C.d.apply(v) - C.d.apply(v)));  // exactness of zero
}
