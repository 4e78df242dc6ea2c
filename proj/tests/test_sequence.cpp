#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "kothe/sequence.hpp"

using namespace kothe;

TEST_CASE("basic nodes evaluate and certify") {
  auto z = SequenceRep::zero();
  CHECK(z.at(1) == 0.0);
  CHECK(z.support_end() == Index{0});
  CHECK(z.abs_bound(1) == 0.0);

  auto ones = SequenceRep::all_ones();
  CHECK(ones.at(123456) == 1.0);
  CHECK(!ones.support_end().has_value());
  CHECK(ones.abs_bound(1000) == 1.0);

  auto g = SequenceRep::geometric(0.5);
  CHECK(g.at(1) == 1.0);
  CHECK(g.at(4) == doctest::Approx(0.125));
  CHECK(g.abs_bound(11) == doctest::Approx(std::ldexp(1.0, -10)));

  CHECK_THROWS_AS(SequenceRep::geometric(-1.0), EvaluationError);
  CHECK_THROWS_AS(ones.at(0), EvaluationError);
}

TEST_CASE("finite support lookup and bounds") {
  auto x = SequenceRep::finite_support({{5, 2.0}, {2, -3.0}, {9, 0.5}});
  CHECK(x.at(2) == -3.0);
  CHECK(x.at(3) == 0.0);
  CHECK(x.at(5) == 2.0);
  CHECK(x.at(9) == 0.5);
  CHECK(x.at(10) == 0.0);
  CHECK(x.support_end() == Index{9});
  CHECK(x.abs_bound(1) == 3.0);
  CHECK(x.abs_bound(3) == 2.0);
  CHECK(x.abs_bound(6) == 0.5);
  CHECK(x.abs_bound(10) == 0.0);
  CHECK_THROWS_AS(SequenceRep::finite_support({{2, 1.0}, {2, 2.0}}), EvaluationError);
}

TEST_CASE("indicator intervals") {
  auto x = SequenceRep::indicator({{3, 5}, {8, 8}}, 2.0);
  CHECK(x.at(2) == 0.0);
  CHECK(x.at(3) == 2.0);
  CHECK(x.at(5) == 2.0);
  CHECK(x.at(6) == 0.0);
  CHECK(x.at(8) == 2.0);
  CHECK(x.support_end() == Index{8});
  CHECK(x.abs_bound(9) == 0.0);
}

TEST_CASE("shift semantics and semigroup law") {
  auto x = SequenceRep::finite_support({{1, 1.0}, {2, 2.0}, {3, 3.0}, {7, 7.0}});
  auto s1 = x.shifted(1);
  CHECK(s1.at(1) == 2.0);
  CHECK(s1.at(6) == 7.0);
  CHECK(s1.support_end() == Index{6});
  // B^a B^b = B^(a+b) pointwise
  auto ab = x.shifted(2).shifted(3);
  auto once = x.shifted(5);
  for (Index j = 1; j <= 10; ++j) CHECK(ab.at(j) == once.at(j));
}

TEST_CASE("window plus tail reassembles the shifted sequence") {
  auto x = SequenceRep::finite_support({{2, -1.5}, {4, 2.5}, {6, 4.0}, {11, 1.0}});
  for (Index k : {Index{0}, Index{1}, Index{3}}) {
    for (Index n : {Index{1}, Index{2}, Index{5}}) {
      auto recomposed = x.window_view(k, n) + x.tail_view(k, n);
      auto direct = x.shifted(k);
      for (Index j = 1; j <= 15; ++j)
        CHECK(recomposed.at(j) == doctest::Approx(direct.at(j)));
    }
  }
}

TEST_CASE("window and tail views certify their supports") {
  auto ones = SequenceRep::all_ones();
  auto w = ones.window_view(3, 10);
  CHECK(w.at(10) == 1.0);
  CHECK(w.at(11) == 0.0);
  CHECK(w.support_end() == Index{10});
  CHECK(w.abs_bound(11) == 0.0);

  auto t = ones.tail_view(3, 10);
  CHECK(t.at(10) == 0.0);
  CHECK(t.at(11) == 1.0);
  CHECK(t.abs_bound(1) == 1.0);
}

TEST_CASE("arithmetic views") {
  auto a = SequenceRep::finite_support({{1, 1.0}, {2, 2.0}});
  auto b = SequenceRep::finite_support({{2, 5.0}, {3, 3.0}});
  auto s = a + b;
  auto d = a - b;
  auto sc = 2.0 * a;
  CHECK(s.at(2) == 7.0);
  CHECK(d.at(2) == -3.0);
  CHECK(d.at(3) == -3.0);
  CHECK(sc.at(2) == 4.0);
  CHECK(s.support_end() == Index{3});
  CHECK(s.abs_bound(2) <= 2.0 + 5.0);  // sum bound is subadditive
  CHECK(a.scaled(0.0).support_end() == Index{0});
}

TEST_CASE("rule nodes carry caller certificates") {
  auto r = SequenceRep::from_rule([](Index j) { return j <= 4 ? 2.0 : 0.0; }, Index{4}, 2.0,
                                  "plateau");
  CHECK(r.at(4) == 2.0);
  CHECK(r.at(5) == 0.0);
  CHECK(r.abs_bound(5) == 0.0);
  CHECK(r.abs_bound(2) == 2.0);
}

TEST_CASE("same_node identity is by representation") {
  auto x = SequenceRep::all_ones();
  auto y = x;
  CHECK(x.same_node(y));
  CHECK(!x.same_node(SequenceRep::all_ones()));
}
