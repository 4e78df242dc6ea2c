#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kothe/matrix.hpp"

using namespace kothe;

TEST_CASE("generator entries") {
  auto c = KotheMatrix::constant(1.0);
  CHECK(c.entry(7, 3) == 1.0);
  auto g = KotheMatrix::geometric(0.5);
  CHECK(g.entry(1, 1) == 1.0);
  CHECK(g.entry(4, 9) == doctest::Approx(0.125));  // k-independent
  auto p = KotheMatrix::power();
  CHECK(p.entry(3, 2) == 9.0);
  CHECK(p.entry(2, 10) == 1024.0);
  auto t = KotheMatrix::tabulated({{1.0, 2.0}, {0.5, 0.5}});
  CHECK(t.entry(1, 2) == 2.0);
  CHECK(t.entry(2, 1) == 0.5);
  CHECK_THROWS_AS(t.entry(3, 1), EvaluationError);
  CHECK_THROWS_AS(c.entry(0, 1), EvaluationError);
}

TEST_CASE("k independence") {
  CHECK(KotheMatrix::constant(2.0).k_independent());
  CHECK(KotheMatrix::geometric(0.5).k_independent());
  CHECK(!KotheMatrix::power().k_independent());
  CHECK(!KotheMatrix::tabulated({{1.0}}).k_independent());
}

TEST_CASE("geometric tail power sum matches brute force") {
  auto g = KotheMatrix::geometric(0.5);
  for (Real p : {1.0, 2.0}) {
    for (Index from : {Index{1}, Index{5}, Index{20}}) {
      Real brute = 0.0;
      for (Index j = from; j < from + 200; ++j)
        brute += std::pow(g.entry(j, 1), p);
      auto closed = g.tail_power_sum(1, from, p);
      REQUIRE(closed.has_value());
      CHECK(*closed == doctest::Approx(brute).epsilon(1e-12));
      CHECK(*closed >= brute);  // certified bound is an upper bound
    }
  }
  // divergent: ratio >= 1 has no finite closed form
  CHECK(!KotheMatrix::geometric(1.0).tail_power_sum(1, 1, 1.0).has_value());
  CHECK(!KotheMatrix::constant(1.0).tail_power_sum(1, 1, 1.0).has_value());
}

TEST_CASE("tail sup") {
  auto g = KotheMatrix::geometric(0.5);
  CHECK(g.tail_sup(1, 11) == doctest::Approx(std::ldexp(1.0, -10)));
  CHECK(KotheMatrix::constant(3.0).tail_sup(1, 100) == 3.0);
  CHECK(!KotheMatrix::power().tail_sup(1, 1).has_value());
}

TEST_CASE("continuity global bounds") {
  CHECK(KotheMatrix::constant(1.0).continuity_global_bound(1, 2) == 1.0);
  CHECK(KotheMatrix::geometric(0.5).continuity_global_bound(1, 2) == doctest::Approx(2.0));
  CHECK(KotheMatrix::power().continuity_global_bound(2, 3) == 1.0);
  CHECK(!KotheMatrix::power().continuity_global_bound(3, 2).has_value());
}

TEST_CASE("axiom validation accepts the bundled generators") {
  for (auto m : {KotheMatrix::geometric(0.5), KotheMatrix::constant(1.0),
                 KotheMatrix::power()}) {
    auto rep = validate_kothe(m, 64, 8);
    CHECK(rep.valid_on_window());
  }
}

TEST_CASE("axiom validation flags violations") {
  // row 1 decreases in k; row 2 is identically zero; row 3 has a negative entry
  auto bad = KotheMatrix::tabulated({{2.0, 1.0}, {0.0, 0.0}, {-1.0, 1.0}});
  auto rep = validate_kothe(bad, 3, 2);
  CHECK(!rep.valid_on_window());
  bool non_monotone = false, zero_row = false, negative = false;
  for (const auto& v : rep.violations) {
    if (v.code == "non_monotone") non_monotone = true;
    if (v.code == "zero_row") zero_row = true;
    if (v.code == "negative_entry") negative = true;
  }
  CHECK(non_monotone);
  CHECK(zero_row);
  CHECK(negative);
}

TEST_CASE("entry overflow raises instead of returning inf") {
  auto p = KotheMatrix::power();
  CHECK_THROWS_AS(p.entry(1000, 200), EvaluationError);
}
