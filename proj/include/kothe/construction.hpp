#pragma once

/// The invariant scrambled-family construction: the amplified witness
/// sequence nu, the odd-prime-power sign-block layout, the sign-patterned
/// nu_bar, the family of scaled shifts it generates, and a verifier that
/// evaluates every inequality the construction's proof relies on at
/// concrete sampled indices.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kothe/dc_stats.hpp"
#include "kothe/schedule.hpp"
#include "kothe/sequence.hpp"
#include "kothe/shift.hpp"
#include "kothe/space.hpp"

namespace kothe {

inline bool is_odd_prime(Index n) {
  if (n < 3 || n % 2 == 0) return false;
  for (Index d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

/// P_1 = 3, P_2 = 5, ... (odd primes in natural order)
inline Index odd_prime(Index n) {
  Index count = 0;
  for (Index c = 3;; c += 2)
    if (is_odd_prime(c) && ++count == n) return c;
}

struct NuBuildResult {
  SequenceRep nu;
  // membership chain: sum_{j>=M_k} |nu_j a_{j,k}|^p <= sum_{l>=k} l^p * tail_l
  std::vector<CheckRecord> membership_chain;
  Index blocks = 0;  // materialized amplification blocks
};

/// nu_j = k*|y_j| on (M_{4k}, M_{4k+3}], zero elsewhere; only blocks whose
/// boundaries are materialized in the schedule exist.
inline NuBuildResult build_nu(const SequenceRep& y, const ConstructionSchedule& cs,
                              const SpaceContext& ctx) {
  NuBuildResult out;
  struct Block {
    Index lo, hi;  // (lo, hi]
    Real coeff;
  };
  auto blocks = std::make_shared<std::vector<Block>>();
  for (Index k = 1; 4 * k + 3 <= cs.M.size(); ++k)
    blocks->push_back({cs.M_at(4 * k), cs.M_at(4 * k + 3), static_cast<Real>(k)});
  out.blocks = blocks->size();
  if (blocks->empty())
    throw EvaluationError("insufficient schedule depth: no amplification block fits");

  Index end = blocks->back().hi;
  Real ybound = y.abs_bound(1);
  Real bound = std::isfinite(ybound) ? blocks->back().coeff * ybound : kInf;
  SequenceRep yc = y;
  out.nu = SequenceRep::from_rule(
      [blocks, yc](Index j) -> Real {
        auto it = std::upper_bound(blocks->begin(), blocks->end(), j,
                                   [](Index v, const Block& b) { return v <= b.hi; });
        if (it == blocks->end() || j <= it->lo) return 0.0;
        return it->coeff * std::abs(yc.at(j));
      },
      end, bound, "nu");

  // reproduce the membership estimate from the recorded tail values
  for (Index k = 1; k <= cs.tail_checks.size(); ++k) {
    PowerTail lhs = weighted_power_tail(out.nu, ctx.A, k, ctx.params.p, cs.M_at(k), ctx.budget);
    Real rhs = 0.0;
    bool certified = lhs.certified;
    for (Index l = k; l <= cs.tail_checks.size(); ++l) {
      const CheckRecord& t = cs.tail_checks[l - 1];
      certified = certified && t.certified;
      rhs += std::pow(static_cast<Real>(l), ctx.params.p == 0.0 ? 1.0 : ctx.params.p) * t.lhs;
    }
    CheckRecord c;
    c.name = "nu_membership";
    c.indices = {k};
    c.lhs = lhs.value + lhs.tail;
    c.rhs = rhs;
    c.certified = certified;
    c.pass = certified && c.lhs <= c.rhs + 1e-12;
    out.membership_chain.push_back(c);
  }
  return out;
}

struct SignBlock {
  Index n = 0, l = 0;       // which (n, l) this window realizes
  Index prime_power = 0;    // P_n^l
  Index base = 0, end = 0;  // window (base, end]
  Index q_limit = 0;        // sub-blocks 0..q_limit participate in the partition

  // sub-block index of j (0-based), or nullopt outside the window
  std::optional<Index> sub_block(Index j) const {
    if (j <= base || j > end) return std::nullopt;
    return (j - base - 1) / l;
  }
  bool in_c0(Index j) const {
    auto q = sub_block(j);
    return q && (*q % 2 == 0) && *q <= q_limit;
  }
  bool in_window(Index j) const { return j > base && j <= end; }
};

struct SignBlockLayout {
  std::vector<SignBlock> blocks;  // sorted by base, pairwise disjoint
  std::vector<std::string> skipped;  // (n,l) pairs not materialized, with reason
  std::vector<CheckRecord> invariant_checks;

  // sign of nu_bar relative to |nu| at j: +1 (C0), -1 (C1), 0 (outside)
  int sign_at(Index j) const {
    auto it = std::upper_bound(blocks.begin(), blocks.end(), j,
                               [](Index v, const SignBlock& b) { return v <= b.end; });
    if (it == blocks.end() || !it->in_window(j)) return 0;
    return it->in_c0(j) ? +1 : -1;
  }
};

/// Materializes every (n, l) window that fits the schedule and the index
/// cap; windows beyond the materialized depth are skipped with a notice.
inline SignBlockLayout build_sign_layout(const ConstructionSchedule& cs, Index n_max,
                                         Index l_max, Index index_cap) {
  SignBlockLayout layout;
  for (Index n = 1; n <= n_max; ++n) {
    Index P = odd_prime(n);
    for (Index l = 1; l <= l_max; ++l) {
      auto tag = [&] { return "(n=" + std::to_string(n) + ",l=" + std::to_string(l) + ")"; };
      Real ppf = std::pow(static_cast<Real>(P), static_cast<Real>(l));
      if (ppf > 1e15) {
        layout.skipped.push_back(tag() + ": prime power too large");
        continue;
      }
      Index pp = 1;
      for (Index i = 0; i < l; ++i) pp *= P;
      Index m = pp + 1;  // k-subsequence entry index
      if (m > cs.k_seq.size()) {
        layout.skipped.push_back(tag() + ": k-subsequence entry " + std::to_string(m) +
                                 " not materialized");
        continue;
      }
      Index kv = cs.k_at(m);
      if (kv + 3 > cs.M.size()) {
        layout.skipped.push_back(tag() + ": schedule entry M_" + std::to_string(kv + 3) +
                                 " not materialized");
        continue;
      }
      SignBlock b;
      b.n = n;
      b.l = l;
      b.prime_power = pp;
      b.base = cs.M_at(kv);
      b.end = cs.M_at(kv + 3);
      if (b.end > index_cap) {
        layout.skipped.push_back(tag() + ": window end exceeds index cap");
        continue;
      }
      b.q_limit = (b.end - b.base) / l - 1;  // 0 <= 2u <= [(end-base)/l] - 1
      layout.blocks.push_back(b);
    }
  }
  std::sort(layout.blocks.begin(), layout.blocks.end(),
            [](const SignBlock& a, const SignBlock& b) { return a.base < b.base; });

  // pairwise disjointness of materialized windows
  for (std::size_t i = 1; i < layout.blocks.size(); ++i) {
    CheckRecord c;
    c.name = "windows_disjoint";
    c.indices = {layout.blocks[i - 1].end, layout.blocks[i].base};
    c.lhs = static_cast<Real>(layout.blocks[i - 1].end);
    c.rhs = static_cast<Real>(layout.blocks[i].base);
    c.pass = layout.blocks[i - 1].end <= layout.blocks[i].base;
    layout.invariant_checks.push_back(c);
  }
  // partition: C0 and C1 are disjoint by construction and cover the window;
  // verified pointwise at sampled indices
  for (const SignBlock& b : layout.blocks) {
    bool ok = true;
    for (Index j : sample_interval(b.base, b.end, 256)) {
      auto q = b.sub_block(j);
      bool covered = q.has_value();  // C1 = window minus C0, so coverage is totality
      ok = ok && covered;
    }
    CheckRecord c;
    c.name = "partition_c0_c1";
    c.indices = {b.n, b.l};
    c.pass = ok;
    c.lhs = c.rhs = 0.0;
    layout.invariant_checks.push_back(c);
  }
  return layout;
}

/// nu_bar: |nu_j| on C0 indices, -|nu_j| on C1 indices, zero otherwise.
inline SequenceRep build_nu_bar(const SequenceRep& nu, const SignBlockLayout& layout) {
  auto lay = std::make_shared<SignBlockLayout>(layout);
  Index end = 0;
  for (const auto& b : lay->blocks) end = std::max(end, b.end);
  SequenceRep nuc = nu;
  return SequenceRep::from_rule(
      [lay, nuc](Index j) -> Real {
        int s = lay->sign_at(j);
        if (s == 0) return 0.0;
        return static_cast<Real>(s) * std::abs(nuc.at(j));
      },
      end, nu.abs_bound(1), "nu_bar");
}

struct ScrambledFamily {
  SequenceRep nu;
  SequenceRep nu_bar;
  std::vector<Real> alphas;
  std::vector<Index> shift_offsets;
  Real separation_floor = 0.1;

  std::vector<FamilyMember> members() const {
    std::vector<FamilyMember> out;
    for (Index off : shift_offsets)
      for (Real a : alphas) out.push_back({a, off, iterate(nu_bar.scaled(a), off)});
    return out;
  }
  /// B applied to the (alpha, offset) member is the (alpha, offset+1) member.
  FamilyMember shifted_member(const FamilyMember& m) const {
    return {m.alpha, m.offset + 1, iterate(nu_bar.scaled(m.alpha), m.offset + 1)};
  }
};

inline ScrambledFamily emit_family(const SequenceRep& nu, const SequenceRep& nu_bar,
                                   std::vector<Real> alphas, Index max_offset,
                                   Real separation_floor = 0.1) {
  for (Real a : alphas)
    if (!(a > 0.0 && a < 1.0))
      throw EvaluationError("alpha " + std::to_string(a) + " must lie in (0,1)");
  std::vector<Real> sorted = alphas;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] == sorted[i - 1])
      throw EvaluationError("duplicate alpha " + std::to_string(sorted[i]));
    if (sorted[i] - sorted[i - 1] < separation_floor)
      throw EvaluationError(
          "alphas " + std::to_string(sorted[i - 1]) + " and " + std::to_string(sorted[i]) +
          " violate the separation floor " + std::to_string(separation_floor) +
          "; the scale-separation case needs |alpha-beta|*k/4 > 1 for some materialized k");
  }
  ScrambledFamily fam;
  fam.nu = nu;
  fam.nu_bar = nu_bar;
  fam.alphas = std::move(alphas);
  for (Index off = 0; off <= max_offset; ++off) fam.shift_offsets.push_back(off);
  fam.separation_floor = separation_floor;
  return fam;
}

struct ConstructionReport {
  std::string mode;
  std::vector<CheckRecord> proximality;  // section (a)
  std::vector<CheckRecord> case1;        // section (b): equal offsets, alpha != beta
  std::vector<CheckRecord> case2;        // section (c): differing offsets, sign opposition
  std::vector<std::string> notices;
  std::string case2_range_note;

  std::size_t passed(const std::vector<CheckRecord>& v) const {
    return static_cast<std::size_t>(
        std::count_if(v.begin(), v.end(), [](const CheckRecord& c) { return c.pass; }));
  }
  bool sections_bc_pass() const {
    return passed(case1) == case1.size() && passed(case2) == case2.size();
  }
};

/// Evaluates the proof's three families of inequalities at deterministic
/// sampled indices. Every record is a comparison of two computed certified
/// numbers; the report makes no asymptotic claim.
inline ConstructionReport verify_construction(const ScrambledFamily& family,
                                              const ConstructionSchedule& cs,
                                              const SignBlockLayout& layout,
                                              const SequenceRep& y, const SpaceContext& ctx,
                                              std::size_t samples_per_window = 64) {
  ConstructionReport rep;
  rep.mode = cs.mode;
  rep.case2_range_note =
      "case 2 window read as (M_{k_m}, M_{k_m+3}] with m = P_n^l + 1, matching the "
      "case 1 index pattern; coordinate range j in (i, i + (M_{k_m+3} - M_{k_m+2})]";

  const auto& alphas = family.alphas;
  const SequenceRep& nb = family.nu_bar;
  const SequenceRep& nu = family.nu;

  // ---- section (a): proximality windows -------------------------------
  // representative offset pairs (p, q)
  std::vector<std::pair<Index, Index>> offset_pairs = {{0, 0}};
  if (family.shift_offsets.size() > 1) offset_pairs.push_back({0, 1});
  for (Index n = 1; 2 * n - 1 <= cs.k_seq.size(); ++n) {
    Index kv = cs.k_at(2 * n - 1);
    Index m_lo = cs.M_at(kv);
    auto hv = cs.h.eval(m_lo, cs.index_cap);
    Index span = hv ? *hv : cs.index_cap;
    if (!hv)
      rep.notices.push_back("proximality window at n=" + std::to_string(n) +
                            " clamped to the index cap");
    for (const auto& [p, q] : offset_pairs) {
      if (span <= q) continue;
      Real a0 = alphas.front(), b0 = alphas.back();
      SequenceRep a = iterate(nb.scaled(a0), p);
      SequenceRep b = iterate(nb.scaled(b0), q);
      for (Index j : sample_interval(m_lo, m_lo + span - q, samples_per_window)) {
        MetricValue lhs = ctx.distance(iterate(a, j), iterate(b, j));
        MetricValue r1 = ctx.distance_from_zero(iterate(nu, j + p));
        MetricValue r2 = ctx.distance_from_zero(iterate(nu, j + q));
        CheckRecord tri;
        tri.name = "prox_triangle";
        tri.indices = {n, j, p, q};
        tri.lhs = lhs.value;
        tri.rhs = r1.value + r1.truncation_error_bound + r2.value + r2.truncation_error_bound;
        // interval-consistency: the bound must not be refuted
        tri.pass = tri.lhs <= tri.rhs + lhs.truncation_error_bound;
        rep.proximality.push_back(tri);

        CheckRecord sm;
        sm.name = "prox_small";
        sm.indices = {n, j, p, q};
        sm.lhs = r1.value + r1.truncation_error_bound + r2.value + r2.truncation_error_bound;
        sm.rhs = 1.0 / static_cast<Real>(n);
        sm.pass = sm.lhs <= sm.rhs;
        rep.proximality.push_back(sm);
      }
    }
  }

  // ---- section (b): equal offsets, alpha != beta ----------------------
  for (Index n = 1;; ++n) {
    Index P = odd_prime(n);
    Index m = P + 1;  // k-subsequence entry index
    if (m > cs.k_seq.size()) {
      rep.notices.push_back("case 1 window for n=" + std::to_string(n) +
                            " not materialized (k-subsequence entry " + std::to_string(m) +
                            " missing)");
      break;
    }
    Index kv = cs.k_at(m);
    if (kv + 1 > cs.M.size()) {
      rep.notices.push_back("case 1 window for n=" + std::to_string(n) +
                            " not materialized (M_" + std::to_string(kv + 1) + " missing)");
      break;
    }
    Index lo = cs.M_at(kv), hi = cs.M_at(kv + 1);
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      for (std::size_t bi = ai + 1; bi < alphas.size(); ++bi) {
        Real al = alphas[ai], be = alphas[bi];
        bool activated = std::abs(al - be) * static_cast<Real>(kv) / 4.0 > 1.0;
        if (!activated) continue;
        SequenceRep sa = nb.scaled(al), sb = nb.scaled(be);
        for (Index j : sample_interval(lo, hi, samples_per_window)) {
          MetricValue lhs = ctx.distance(iterate(sa, j), iterate(sb, j));
          MetricValue rhs = ctx.distance_from_zero(iterate(y, j));
          CheckRecord c;
          c.name = "case1_separation";
          c.indices = {n, j};
          c.note = "alpha=" + std::to_string(al) + " beta=" + std::to_string(be);
          c.lhs = lhs.value;
          c.rhs = rhs.value + rhs.truncation_error_bound - 1.0 / static_cast<Real>(kv);
          c.pass = c.lhs >= c.rhs;
          rep.case1.push_back(c);
        }
      }
    }
  }

  // ---- section (c): differing offsets, sign opposition ----------------
  std::vector<Index> materialized_l;
  for (const SignBlock& b : layout.blocks)
    if (std::find(materialized_l.begin(), materialized_l.end(), b.l) == materialized_l.end())
      materialized_l.push_back(b.l);
  if (materialized_l.empty())
    rep.notices.push_back("case 2 unverifiable: no sign block materialized");

  for (const SignBlock& b : layout.blocks) {
    Index l = b.l;
    Index m = b.prime_power + 1;
    Index kv = cs.k_at(m);
    if (kv + 3 > cs.M.size()) continue;
    Index lo = cs.M_at(kv), hi = cs.M_at(kv + 1);
    Index W = cs.M_at(kv + 3) - cs.M_at(kv + 2);
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      for (std::size_t bi = 0; bi < alphas.size(); ++bi) {
        Real al = alphas[ai], be = alphas[bi];
        // pair a = alpha*nu_bar, b = B^l(beta*nu_bar), i.e. q - p = l
        SequenceRep diff = nb.scaled(al) - iterate(nb.scaled(be), l);
        for (Index i : sample_interval(lo, hi, samples_per_window / 8 + 1)) {
          bool premise_ok = true;
          Index witness = 0;
          for (Index j : sample_interval(i, i + W - 1, samples_per_window / 4 + 1)) {
            Real dj = std::abs(diff.at(j));
            Real aj = std::abs(al * nb.at(j));
            if (dj < aj) {
              premise_ok = false;
              witness = j;
              break;
            }
          }
          CheckRecord pr;
          pr.name = "case2_sign_premise";
          pr.indices = {b.n, l, i, witness};
          pr.note = "alpha=" + std::to_string(al) + " beta=" + std::to_string(be);
          pr.pass = premise_ok;
          pr.lhs = pr.rhs = 0.0;
          rep.case2.push_back(pr);

          MetricValue lhs = ctx.distance_from_zero(iterate(diff, i));
          MetricValue rhs = ctx.distance_from_zero(window(nb.scaled(al), i, W));
          CheckRecord c;
          c.name = "case2_window_separation";
          c.indices = {b.n, l, i};
          c.note = pr.note;
          c.lhs = lhs.value;
          c.rhs = rhs.value + rhs.truncation_error_bound;
          c.pass = c.lhs >= c.rhs - 1e-12;
          rep.case2.push_back(c);
        }
      }
    }
  }
  return rep;
}

}  // namespace kothe
