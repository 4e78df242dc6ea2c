#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kothe/construction.hpp"

using namespace kothe;

namespace {

SpaceContext geometric_ctx() {
  SpaceContext ctx;
  ctx.A = KotheMatrix::geometric(0.5);
  ctx.params.p = 1.0;
  return ctx;
}

// Bundled-instance schedule: delta=0.5, gap M+8, h M/2, k_max=14, n_max=2.
struct Built {
  SpaceContext ctx = geometric_ctx();
  SequenceRep y = SequenceRep::all_ones();
  ConstructionSchedule cs;
  NuBuildResult nu;
  SignBlockLayout layout;
  SequenceRep nu_bar;

  Built() {
    auto ds = find_density_schedule(SequenceRep::zero(), y, 0.5, {0.5, 0.25, 0.125},
                                    100000, ctx);
    cs = refine_gap_schedule(ds, GrowthFunction::affine(1.0, 8.0),
                             GrowthFunction::affine(0.5, 0.0), y, ctx, 14, 100000, "scaled");
    nu = build_nu(y, cs, ctx);
    select_k_subsequence(cs, nu.nu, ctx, 2);
    layout = build_sign_layout(cs, 2, 3, 100000);
    nu_bar = build_nu_bar(nu.nu, layout);
  }
};

const Built& built() {
  static Built b;
  return b;
}

}  // namespace

TEST_CASE("odd primes") {
  CHECK(odd_prime(1) == 3);
  CHECK(odd_prime(2) == 5);
  CHECK(odd_prime(3) == 7);
  CHECK(odd_prime(4) == 11);
  CHECK(is_odd_prime(97));
  CHECK(!is_odd_prime(2));
  CHECK(!is_odd_prime(91));  // 7 * 13
}

TEST_CASE("amplified witness block values") {
  const auto& b = built();
  // blocks: (M_4, M_7] = (88, 760] with coefficient 1,
  //         (M_8, M_11] = (1528, 12280] with coefficient 2
  CHECK(b.nu.blocks == 2);
  CHECK(b.nu.nu.at(88) == 0.0);
  CHECK(b.nu.nu.at(89) == 1.0);
  CHECK(b.nu.nu.at(760) == 1.0);
  CHECK(b.nu.nu.at(761) == 0.0);
  CHECK(b.nu.nu.at(1528) == 0.0);
  CHECK(b.nu.nu.at(1529) == 2.0);
  CHECK(b.nu.nu.at(12280) == 2.0);
  CHECK(b.nu.nu.at(12281) == 0.0);
  CHECK(b.nu.nu.support_end() == Index{12280});
  for (const auto& c : b.nu.membership_chain) {
    CHECK(c.certified);
    CHECK(c.pass);
  }
}

TEST_CASE("insufficient schedule depth is an error, not a silent zero") {
  auto ctx = geometric_ctx();
  ConstructionSchedule shallow;
  shallow.M = {4, 16, 40};  // no (M_4, M_7] block fits
  CHECK_THROWS_WITH_AS(build_nu(SequenceRep::all_ones(), shallow, ctx),
                       doctest::Contains("insufficient schedule depth"), EvaluationError);
}

TEST_CASE("sign layout materializes exactly the feasible windows") {
  const auto& b = built();
  REQUIRE(b.layout.blocks.size() == 1);
  const SignBlock& blk = b.layout.blocks[0];
  CHECK(blk.n == 1);
  CHECK(blk.l == 1);
  CHECK(blk.prime_power == 3);
  CHECK(blk.base == 1528);
  CHECK(blk.end == 12280);
  CHECK(b.layout.skipped.size() == 5);  // the other (n,l) pairs of n<=2, l<=3
  for (const auto& c : b.layout.invariant_checks) CHECK(c.pass);
}

TEST_CASE("sign alternation inside the l=1 window") {
  const auto& b = built();
  // sub-blocks have length 1, so signs alternate starting positive
  CHECK(b.layout.sign_at(1529) == +1);
  CHECK(b.layout.sign_at(1530) == -1);
  CHECK(b.layout.sign_at(1531) == +1);
  CHECK(b.layout.sign_at(1528) == 0);   // window is half-open from below
  CHECK(b.layout.sign_at(12281) == 0);
  for (Index j = 1529; j <= 1600; ++j)
    CHECK(b.layout.sign_at(j) == ((j - 1529) % 2 == 0 ? +1 : -1));
}

TEST_CASE("nu_bar is dominated by nu and matches the layout signs") {
  const auto& b = built();
  for (Index j : {Index{1}, Index{100}, Index{800}, Index{1529}, Index{1530},
                  Index{5000}, Index{12280}, Index{20000}}) {
    CHECK(std::abs(b.nu_bar.at(j)) <= std::abs(b.nu.nu.at(j)) + 1e-15);
    int s = b.layout.sign_at(j);
    if (s != 0)
      CHECK(b.nu_bar.at(j) == doctest::Approx(s * std::abs(b.nu.nu.at(j))));
    else
      CHECK(b.nu_bar.at(j) == 0.0);
  }
}

TEST_CASE("family membership and shift closure") {
  const auto& b = built();
  auto fam = emit_family(b.nu.nu, b.nu_bar, {0.2, 0.5, 0.8}, 1);
  auto mem = fam.members();
  CHECK(mem.size() == 6);  // 3 alphas x offsets {0, 1}
  // B maps the (alpha, off) member to the (alpha, off+1) member pointwise
  for (const auto& m : mem) {
    auto shifted = fam.shifted_member(m);
    auto applied = backward_shift(m.seq);
    for (Index j : {Index{1}, Index{1529}, Index{5000}})
      CHECK(applied.at(j) == doctest::Approx(shifted.seq.at(j)));
  }
}

TEST_CASE("family validation rejects bad scale sets") {
  const auto& b = built();
  CHECK_THROWS_AS(emit_family(b.nu.nu, b.nu_bar, {0.5, 1.5}, 0), EvaluationError);
  CHECK_THROWS_AS(emit_family(b.nu.nu, b.nu_bar, {0.5, 0.5}, 0), EvaluationError);
  CHECK_THROWS_WITH_AS(emit_family(b.nu.nu, b.nu_bar, {0.50, 0.55}, 0),
                       doctest::Contains("separation floor"), EvaluationError);
}

TEST_CASE("construction verifier passes on the bundled instance") {
  const auto& b = built();
  auto fam = emit_family(b.nu.nu, b.nu_bar, {0.2, 0.35, 0.5, 0.65, 0.8, 0.95}, 1);
  auto rep = verify_construction(fam, b.cs, b.layout, b.y, b.ctx, 32);
  CHECK(rep.mode == "scaled");
  CHECK(!rep.proximality.empty());
  CHECK(!rep.case1.empty());
  CHECK(!rep.case2.empty());
  for (const auto& c : rep.proximality) CHECK(c.pass);
  CHECK(rep.sections_bc_pass());
  // activated pairs exist: |alpha - beta| * k_4 / 4 = 2|alpha - beta| > 1
  bool saw_extreme_pair = false;
  for (const auto& c : rep.case1)
    if (c.note.find("alpha=0.2") != std::string::npos &&
        c.note.find("beta=0.95") != std::string::npos)
      saw_extreme_pair = true;
  CHECK(saw_extreme_pair);
}
