#pragma once

/// Index machinery for the scrambled-set construction: the density horizon
/// sequence, the gap-refined subsequence M with its per-step tail and window
/// checks, and the parity-structured subsequence k_n with its tail-smallness
/// checks. Every inequality that the construction relies on is evaluated and
/// recorded; nothing is assumed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kothe/dc_stats.hpp"
#include "kothe/sequence.hpp"
#include "kothe/shift.hpp"
#include "kothe/space.hpp"

namespace kothe {

struct CheckRecord {
  std::string name;
  std::vector<Index> indices;
  Real lhs = 0.0;
  Real rhs = 0.0;
  bool pass = false;
  bool certified = true;
  std::string note;
};

/// Growth rules used for the inter-block gap g and the proximality window
/// length h. Faithful mode uses the exponential rules; scaled mode replaces
/// them with affine surrogates so all indices stay below a computable cap.
struct GrowthFunction {
  enum class Kind { Pow4, Pow2, Affine };
  Kind kind = Kind::Affine;
  Real scale = 1.0;
  Real add = 8.0;

  static GrowthFunction pow4() { return {Kind::Pow4, 0, 0}; }
  static GrowthFunction pow2() { return {Kind::Pow2, 0, 0}; }
  static GrowthFunction affine(Real scale, Real add) { return {Kind::Affine, scale, add}; }

  /// g(M) when it fits below `limit`, nullopt otherwise.
  std::optional<Index> eval(Index M, Index limit) const {
    switch (kind) {
      case Kind::Pow4: {
        if (M >= 31 || (Index{1} << (2 * M)) > limit) return std::nullopt;
        return Index{1} << (2 * M);
      }
      case Kind::Pow2: {
        if (M >= 62 || (Index{1} << M) > limit) return std::nullopt;
        return Index{1} << M;
      }
      case Kind::Affine: {
        Real v = scale * static_cast<Real>(M) + add;
        if (v < 0) v = 0;
        if (v > static_cast<Real>(limit)) return std::nullopt;
        return static_cast<Index>(std::llround(v));
      }
    }
    return std::nullopt;
  }

  std::string describe() const {
    switch (kind) {
      case Kind::Pow4: return "4^M";
      case Kind::Pow2: return "2^M";
      case Kind::Affine:
        return std::to_string(scale) + "*M+" + std::to_string(add);
    }
    return "?";
  }
};

/// Deterministic sample of indices in the half-open-from-below interval
/// (lo, hi]: endpoints plus a fixed stride, at most max_count points.
inline std::vector<Index> sample_interval(Index lo, Index hi, std::size_t max_count = 64) {
  std::vector<Index> out;
  if (hi <= lo) return out;
  Index width = hi - lo;
  if (width <= max_count) {
    for (Index j = lo + 1; j <= hi; ++j) out.push_back(j);
    return out;
  }
  Index stride = width / static_cast<Index>(max_count - 1);
  for (Index j = lo + 1; j <= hi; j += stride) out.push_back(j);
  if (out.back() != hi) out.push_back(hi);
  return out;
}

struct DensitySchedule {
  std::vector<Index> N;          // admissible horizons, ascending
  std::vector<Real> densities;   // separated-orbit density at each N entry
  Real delta = 0.0;
  std::size_t eta_targets_met = 0;  // how many eta_seq thresholds are witnessed
};

/// Scans horizons up to horizon_cap and returns every horizon whose density
/// of delta-separated iterates meets the (saturating) eta targets, with
/// densities kept nondecreasing along the list. Ambiguous iterates count
/// against separation.
inline DensitySchedule find_density_schedule(const SequenceRep& x, const SequenceRep& y,
                                             Real delta, const std::vector<Real>& eta_seq,
                                             Index horizon_cap, const SpaceContext& ctx) {
  if (delta <= 0) throw EvaluationError("delta must be positive");
  if (eta_seq.empty()) throw EvaluationError("eta_seq must be nonempty");
  DensitySchedule ds;
  ds.delta = delta;

  const SequenceRep diff = x - y;
  const bool identical = x.same_node(y);
  Index separated = 0;
  Real last_density = 0.0;
  std::size_t k = 0;  // next eta target
  Real best_density = 0.0;
  Index best_at = 0;
  for (Index i = 0; i < horizon_cap; ++i) {
    if (!identical) {
      MetricValue d = ctx.distance_from_zero(diff.shifted(i));
      if (d.value >= delta) ++separated;  // interval lower bound must clear delta
    }
    Index H = i + 1;
    Real density = static_cast<Real>(separated) / static_cast<Real>(H);
    if (density > best_density) {
      best_density = density;
      best_at = H;
    }
    Real eta = eta_seq[std::min(k, eta_seq.size() - 1)];
    if (density >= 1.0 - eta && density >= last_density) {
      ds.N.push_back(H);
      ds.densities.push_back(density);
      last_density = density;
      if (k < eta_seq.size()) ++k;
    }
  }
  ds.eta_targets_met = std::min(k, eta_seq.size());
  if (ds.eta_targets_met < eta_seq.size()) {
    throw EvaluationError("hypothesis not evidenced below horizon_cap: target k=" +
                          std::to_string(ds.eta_targets_met + 1) + " unmet; best density " +
                          std::to_string(best_density) + " at horizon " +
                          std::to_string(best_at));
  }
  return ds;
}

/// Certified sum_{j>=from} |y_j a_{j,k}|^p (power-sum scale, no root).
struct PowerTail {
  Real value = 0.0;
  Real tail = 0.0;
  bool certified = false;
};

inline PowerTail weighted_power_tail(const SequenceRep& y, const KotheMatrix& A, Index k,
                                     Real p, Index from, const TailBudget& budget = {}) {
  PowerTail out;
  const auto se = y.support_end();
  Real acc = 0.0;
  for (Index j = from;; ++j) {
    if (se && j > *se) {
      out.tail = 0.0;
      out.certified = true;
      break;
    }
    if (j - from > budget.cutoff) {
      auto rb = detail::remainder_bound(y, A, k, p, j);
      if (rb) {
        out.tail = *rb;
        out.certified = true;
      } else {
        out.tail = kInf;
        out.certified = false;
      }
      break;
    }
    if (((j - from) & 15u) == 1u) {
      auto rb = detail::remainder_bound(y, A, k, p, j);
      if (rb && *rb < budget.eps_cut) {
        out.tail = *rb;
        out.certified = true;
        break;
      }
    }
    acc += std::pow(std::abs(y.at(j) * A.entry(j, k)), p == 0.0 ? 1.0 : p);
  }
  out.value = acc;
  return out;
}

struct ConstructionSchedule {
  std::vector<Index> M;  // M[0] = M_1
  GrowthFunction gap;    // g in the inter-block gap condition
  GrowthFunction h;      // proximality window length rule
  Real delta = 0.0;
  Index index_cap = 100000;
  std::string mode = "scaled";  // "faithful" | "scaled"

  std::vector<CheckRecord> gap_checks;     // M_{k+1} - M_k >= g(M_k)
  std::vector<CheckRecord> tail_checks;    // sum_{j>=M_k} |y_j a_{j,k}|^p < 2^{-k}
  std::vector<CheckRecord> window_checks;  // d(0, y(j, M_{2k+2}-M_{2k+1})) >= d(0,B^j y) - 1/(2k)
  std::vector<CheckRecord> tail10_checks;  // d(0, nu[j, M_{k_2n} - g(M_{k_2n-1})]) <= 1/(2n)

  std::vector<Index> k_seq;  // k_1, k_2, ...; k_{2n} in 4N, k_{2n+1} = k_{2n}+3

  Index M_at(Index k) const {  // 1-based
    if (k == 0 || k > M.size()) throw EvaluationError("schedule index M_" + std::to_string(k) +
                                                      " not materialized");
    return M[k - 1];
  }
  Index k_at(Index n) const {  // 1-based entry of the k-subsequence
    if (n == 0 || n > k_seq.size())
      throw EvaluationError("k-subsequence entry k_" + std::to_string(n) + " not materialized");
    return k_seq[n - 1];
  }
  bool all_gap_and_tail_checks_pass() const {
    for (const auto& c : gap_checks)
      if (!c.pass) return false;
    for (const auto& c : tail_checks)
      if (!c.pass) return false;
    return true;
  }
};

/// Selects a subsequence M of the density horizons satisfying the gap rule,
/// records the certified per-k tail values against 2^{-k}, and verifies the
/// window-separation inequality at sampled indices. Failing tail or window
/// checks trigger re-selection of the offending entry, up to max_retries.
inline ConstructionSchedule refine_gap_schedule(const DensitySchedule& N,
                                                const GrowthFunction& gap,
                                                const GrowthFunction& h,
                                                const SequenceRep& y, const SpaceContext& ctx,
                                                Index k_max, Index index_cap,
                                                std::string mode, int max_retries = 8,
                                                std::size_t samples_per_window = 64) {
  ConstructionSchedule cs;
  cs.gap = gap;
  cs.h = h;
  cs.delta = N.delta;
  cs.index_cap = index_cap;
  cs.mode = std::move(mode);
  if (k_max == 0) return cs;  // empty schedule, trivially valid

  // skip[i]: how many otherwise-admissible candidates to pass over for M_{i+1}
  std::vector<std::size_t> skip(k_max, 0);
  int retries = 0;

  for (;;) {
    cs.M.clear();
    cs.gap_checks.clear();
    cs.tail_checks.clear();
    cs.window_checks.clear();

    bool truncated = false;
    for (Index k = 1; k <= k_max && !truncated; ++k) {
      Index lower;  // minimal admissible value for M_k
      if (k == 1) {
        lower = 1;
      } else {
        Index prev = cs.M.back();
        auto g = gap.eval(prev, index_cap);
        if (!g || prev + *g > index_cap) {
          CheckRecord c;
          c.name = "gap_cap";
          c.indices = {k};
          c.pass = false;
          c.note = "index cap exceeded at k=" + std::to_string(k) + " (gap " +
                   gap.describe() + " from M=" + std::to_string(prev) + ")";
          cs.gap_checks.push_back(c);
          truncated = true;
          break;
        }
        lower = prev + *g;
      }
      // candidates come from the admissible density horizons
      auto it = std::lower_bound(N.N.begin(), N.N.end(), lower);
      std::size_t to_skip = skip[k - 1];
      std::optional<Index> chosen;
      for (; it != N.N.end(); ++it) {
        // re-check tail condition (4.8-style) at candidate, honoring skips
        PowerTail pt = weighted_power_tail(y, ctx.A, k, ctx.params.p, *it, ctx.budget);
        bool tail_ok = pt.certified && (pt.value + pt.tail < std::ldexp(1.0, -(int)k));
        if (!pt.certified) {
          // cannot improve by scanning; accept and mark uncertified
          chosen = *it;
          break;
        }
        if (!tail_ok) continue;  // advance until the tail condition holds
        if (to_skip > 0) {
          --to_skip;
          continue;
        }
        chosen = *it;
        break;
      }
      if (!chosen) {
        CheckRecord c;
        c.name = "gap_unsatisfiable";
        c.indices = {k};
        c.pass = false;
        c.note = "no admissible horizon for M_" + std::to_string(k) +
                 " below the horizon cap";
        cs.gap_checks.push_back(c);
        truncated = true;
        break;
      }
      cs.M.push_back(*chosen);
      if (k > 1) {
        Index prev = cs.M[cs.M.size() - 2];
        auto g = gap.eval(prev, index_cap);
        CheckRecord c;
        c.name = "gap_4.7";
        c.indices = {k};
        c.lhs = static_cast<Real>(*chosen - prev);
        c.rhs = static_cast<Real>(*g);
        c.pass = c.lhs >= c.rhs;
        cs.gap_checks.push_back(c);
      }
      {
        PowerTail pt = weighted_power_tail(y, ctx.A, k, ctx.params.p, *chosen, ctx.budget);
        CheckRecord c;
        c.name = "tail_4.8";
        c.indices = {k, *chosen};
        c.lhs = pt.value + pt.tail;
        c.rhs = std::ldexp(1.0, -(int)k);
        c.certified = pt.certified;
        c.pass = pt.certified && c.lhs < c.rhs;
        if (!pt.certified) c.note = "uncertified";
        cs.tail_checks.push_back(c);
      }
    }

    // window-separation checks over (M_2k, M_2k+1], needs M_2k+2
    bool window_failure = false;
    std::size_t failing_slot = 0;
    for (Index kk = 1; 2 * kk + 2 <= cs.M.size(); ++kk) {
      Index lo = cs.M_at(2 * kk);
      Index hi = cs.M_at(2 * kk + 1);
      Index len = cs.M_at(2 * kk + 2) - cs.M_at(2 * kk + 1);
      for (Index j : sample_interval(lo, hi, samples_per_window)) {
        MetricValue lhs = ctx.distance_from_zero(window(y, j, len));
        MetricValue rhs = ctx.distance_from_zero(iterate(y, j));
        CheckRecord c;
        c.name = "window_4.9";
        c.indices = {kk, j};
        c.lhs = lhs.value;  // certified lower bound of the left side
        c.rhs = rhs.value + rhs.truncation_error_bound - 1.0 / (2.0 * static_cast<Real>(kk));
        c.pass = c.lhs >= c.rhs;
        cs.window_checks.push_back(c);
        if (!c.pass && !window_failure) {
          window_failure = true;
          failing_slot = static_cast<std::size_t>(2 * kk + 2) - 1;
        }
      }
    }
    if (window_failure && retries < max_retries) {
      ++retries;
      ++skip[failing_slot];
      continue;  // re-select from the failing M entry onward
    }
    break;
  }
  return cs;
}

/// Chooses the parity-structured subsequence k_n (k_1 = 1, even entries from
/// 4N, odd entries trailing by 3) and verifies the tail-smallness condition
/// at sampled indices past each odd entry. Failures advance the even entry,
/// up to max_retries.
inline void select_k_subsequence(ConstructionSchedule& cs, const SequenceRep& nu,
                                 const SpaceContext& ctx, Index n_max, int max_retries = 8,
                                 std::size_t samples_per_window = 64) {
  cs.k_seq.clear();
  cs.tail10_checks.clear();
  if (cs.M.empty()) return;
  cs.k_seq.push_back(1);  // k_1 = 1

  for (Index n = 1; n <= n_max; ++n) {
    Index prev = cs.k_seq.back();       // k_{2n-1}
    Index cand = ((prev / 4) + 1) * 4;  // smallest multiple of 4 above prev
    int retries = 0;
    bool placed = false;
    while (cand + 3 <= cs.M.size()) {
      // tail-smallness condition past M_{k_{2n-1}} (4.10 analogue)
      Index m_prev = cs.M_at(prev);
      Index m_even = cs.M_at(cand);
      auto gv = cs.gap.eval(m_prev, cs.index_cap);
      Index zeros = gv && *gv < m_even ? m_even - *gv : 0;
      auto hv = cs.h.eval(m_prev, cs.index_cap);
      Index span = hv ? *hv : cs.index_cap;  // clamp astronomically long windows
      std::vector<CheckRecord> recs;
      bool ok = true;
      for (Index j : sample_interval(m_prev, m_prev + span, samples_per_window)) {
        MetricValue d = ctx.distance_from_zero(tail(nu, j, zeros));
        CheckRecord c;
        c.name = "tail_4.10";
        c.indices = {n, j};
        c.lhs = d.value + d.truncation_error_bound;
        c.rhs = 1.0 / (2.0 * static_cast<Real>(n));
        c.pass = c.lhs <= c.rhs;
        if (!hv) c.note = "window clamped to index cap";
        recs.push_back(c);
        ok = ok && c.pass;
      }
      if (ok || retries >= max_retries) {
        cs.k_seq.push_back(cand);      // k_{2n}
        cs.k_seq.push_back(cand + 3);  // k_{2n+1}
        for (auto& c : recs) cs.tail10_checks.push_back(std::move(c));
        placed = true;
        break;
      }
      ++retries;
      cand += 4;
    }
    if (!placed) break;  // no admissible even entry at this depth
  }
  // drop a trailing odd entry whose index exceeds the materialized depth
  while (!cs.k_seq.empty() && cs.k_seq.back() > cs.M.size()) cs.k_seq.pop_back();
}

}  // namespace kothe
