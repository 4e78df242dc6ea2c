#pragma once

/// The space lambda_p(A): seminorms with certified tails, the translation
/// invariant metric, the shift-continuity condition on A, and membership
/// reports. No infinite sum is ever truncated silently; every value carries
/// a certified bound on the discarded remainder or the operation throws
/// UncertifiedTailError.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kothe/matrix.hpp"
#include "kothe/sequence.hpp"

namespace kothe {

struct SpaceParams {
  Real p = 1.0;  // 0 (sup case) or >= 1

  bool is_sup_case() const { return p == 0.0; }
  void validate() const {
    if (!(p == 0.0 || p >= 1.0)) throw EvaluationError("p must be 0 or >= 1");
  }
};

struct TailBudget {
  Index cutoff = 1u << 20;        // hard truncation index
  Real eps_cut = 1e-18;           // stop early once the certified remainder is below this
  std::optional<Real> caller_tail;  // caller-supplied bound on the remainder past cutoff
};

struct SeminormResult {
  Real value = 0.0;       // computed from the evaluated range
  Real tail_bound = 0.0;  // certified bound on the contribution of the rest
};

namespace detail {

// Certified bound on sum_{i>=j} |x_i a_{i,k}|^p (p>=1) or sup (p=0).
// Returns nullopt when no certificate is available.
inline std::optional<Real> remainder_bound(const SequenceRep& x, const KotheMatrix& A, Index k,
                                           Real p, Index from) {
  auto se = x.support_end();
  if (se && from > *se) return 0.0;
  Real xb = x.abs_bound(from);
  if (xb == 0.0) return 0.0;
  if (!std::isfinite(xb)) return std::nullopt;
  if (p == 0.0) {
    auto ws = A.tail_sup(k, from);
    if (!ws) return std::nullopt;
    return xb * *ws;
  }
  auto ws = A.tail_power_sum(k, from, p);
  if (!ws) return std::nullopt;
  return std::pow(xb, p) * *ws;
}

}  // namespace detail

/// ||x||_k with a certified tail bound on the norm.
inline SeminormResult seminorm(const SequenceRep& x, Index k, const SpaceParams& params,
                               const KotheMatrix& A, const TailBudget& budget = {}) {
  params.validate();
  if (k == 0) throw EvaluationError("seminorm index k must be >= 1");
  const Real p = params.p;
  const auto se = x.support_end();

  Real acc = 0.0;  // partial p-power sum, or running sup for p=0
  Real tail_power = -1.0;  // certified remainder (power-sum scale), <0 = not yet certified
  Index j = 1;
  for (;; ++j) {
    if (se && j > *se) {
      tail_power = 0.0;
      break;
    }
    if (j > budget.cutoff) {
      if (budget.caller_tail) {
        tail_power = *budget.caller_tail;
        break;
      }
      auto rb = detail::remainder_bound(x, A, k, p, j);
      if (!rb)
        throw UncertifiedTailError("seminorm of " + x.describe() + " at k=" +
                                   std::to_string(k) + " truncated without certificate");
      tail_power = *rb;
      break;
    }
    // periodic early-exit probe
    if ((j & 15u) == 1u && j > 1) {
      auto rb = detail::remainder_bound(x, A, k, p, j);
      if (rb && *rb < budget.eps_cut) {
        tail_power = *rb;
        break;
      }
    }
    Real term = std::abs(x.at(j) * A.entry(j, k));
    if (p == 0.0)
      acc = std::max(acc, term);
    else
      acc += std::pow(term, p);
  }

  SeminormResult r;
  if (p == 0.0) {
    r.value = acc;
    r.tail_bound = tail_power;  // remaining sup can exceed current value by at most this
  } else {
    r.value = std::pow(acc, 1.0 / p);
    r.tail_bound = std::pow(acc + tail_power, 1.0 / p) - r.value;
  }
  return r;
}

struct MetricValue {
  Real value = 0.0;                  // in [0, 1)
  Real truncation_error_bound = 0.0;  // series cut + propagated seminorm tails
};

/// d(x,y) = sum_n 2^{-n} ||x-y||_n / (1 + ||x-y||_n), truncated at
/// N = ceil(log2(1/tol)) terms with certified error accounting.
inline MetricValue metric_d(const SequenceRep& x, const SequenceRep& y,
                            const SpaceParams& params, const KotheMatrix& A, Real tol = 1e-12,
                            const TailBudget& budget = {}) {
  if (tol <= 0) throw EvaluationError("metric tolerance must be positive");
  if (x.same_node(y)) return {0.0, 0.0};

  const int N = static_cast<int>(std::ceil(std::log2(1.0 / tol)));
  const SequenceRep diff = x - y;

  Real value = 0.0;
  Real err = std::ldexp(1.0, -N);  // discarded series tail sum_{n>N} 2^{-n}

  auto accumulate = [&](int n, const SeminormResult& s) {
    Real w = std::ldexp(1.0, -n);
    Real f = s.value / (1.0 + s.value);
    value += w * f;
    // f is 1-Lipschitz and bounded by 1
    err += w * std::min(s.tail_bound, 1.0 - f);
  };

  if (A.k_independent()) {
    SeminormResult s = seminorm(diff, 1, params, A, budget);
    Real f = s.value / (1.0 + s.value);
    Real series = 1.0 - std::ldexp(1.0, -N);  // sum_{n<=N} 2^{-n}
    value = series * f;
    err += series * std::min(s.tail_bound, 1.0 - f);
  } else {
    for (int n = 1; n <= N; ++n) {
      accumulate(n, seminorm(diff, static_cast<Index>(n), params, A, budget));
    }
  }
  return {value, err};
}

/// Convenience: d(0, x).
inline MetricValue metric_from_zero(const SequenceRep& x, const SpaceParams& params,
                                    const KotheMatrix& A, Real tol = 1e-12,
                                    const TailBudget& budget = {}) {
  return metric_d(SequenceRep::zero(), x, params, A, tol, budget);
}

struct ContinuityCandidate {
  Index m = 0;
  Real windowed_sup = 0.0;
  bool rejected = false;       // a_{j+1,m}=0 with a_{j,n}>0 within the window
  std::optional<Real> global_bound;  // closed-form bound from the generator
};

struct ContinuityReport {
  Index n = 0;
  std::vector<ContinuityCandidate> candidates;
  std::optional<Index> witness_m;
  bool window_evidence_only = true;

  bool satisfied() const { return witness_m.has_value(); }
};

/// Searches m in (n, m_search_max] for a witness of the shift-continuity
/// ratio condition, applying the 0/0-as-1 convention.
inline ContinuityReport check_continuity(const KotheMatrix& A, Index n, Index m_search_max,
                                         Index j_max) {
  if (m_search_max <= n) throw EvaluationError("m_search_max must exceed n");
  ContinuityReport rep;
  rep.n = n;
  for (Index m = n + 1; m <= m_search_max; ++m) {
    ContinuityCandidate cand;
    cand.m = m;
    for (Index j = 1; j <= j_max; ++j) {
      Real num = A.entry(j, n);
      Real den = A.entry(j + 1, m);
      Real ratio;
      if (den == 0.0) {
        if (num == 0.0) {
          ratio = 1.0;  // 0/0 convention
        } else {
          cand.rejected = true;
          break;
        }
      } else {
        ratio = std::abs(num / den);
      }
      cand.windowed_sup = std::max(cand.windowed_sup, ratio);
    }
    cand.global_bound = A.continuity_global_bound(n, m);
    bool ok = !cand.rejected && std::isfinite(cand.windowed_sup);
    rep.candidates.push_back(cand);
    if (ok && !rep.witness_m) {
      rep.witness_m = m;
      rep.window_evidence_only = !cand.global_bound.has_value();
      break;
    }
  }
  return rep;
}

struct MembershipEntry {
  Index k = 0;
  Real value = 0.0;
  Real tail_bound = 0.0;
  bool certified = false;
  bool divergence_evidence = false;  // partial sums exceeded the divergence threshold
};

struct MembershipReport {
  std::vector<MembershipEntry> per_k;
  std::string verdict;  // "certified member on window" | "not a member (evidence)" | "inconclusive"
  // p=0 decay evidence: sup_{j>=J} |x_j a_{j,k}| bound at the budgeted J
  std::vector<std::pair<Index, Real>> decay_bounds;

  bool certified_member() const { return verdict == "certified member on window"; }
};

/// Membership of x in lambda_p(A) for k <= k_max, with certificates where
/// available and explicit divergence evidence otherwise.
inline MembershipReport membership(const SequenceRep& x, const SpaceParams& params,
                                   const KotheMatrix& A, Index k_max,
                                   const TailBudget& budget = {},
                                   Real divergence_threshold = 1e9) {
  params.validate();
  if (k_max < 1) throw EvaluationError("k_max must be >= 1");
  MembershipReport rep;
  bool all_certified = true;
  bool any_divergent = false;
  for (Index k = 1; k <= k_max; ++k) {
    MembershipEntry e;
    e.k = k;
    try {
      SeminormResult s = seminorm(x, k, params, A, budget);
      e.value = s.value;
      e.tail_bound = s.tail_bound;
      e.certified = true;
    } catch (const UncertifiedTailError&) {
      // probe the partial sum for divergence evidence
      Real acc = 0.0;
      const Real p = params.p == 0.0 ? 1.0 : params.p;
      for (Index j = 1; j <= budget.cutoff; ++j) {
        acc += std::pow(std::abs(x.at(j) * A.entry(j, k)), p);
        if (acc > divergence_threshold) break;
      }
      e.value = params.p == 0.0 ? acc : std::pow(acc, 1.0 / p);
      e.certified = false;
      e.divergence_evidence = acc > divergence_threshold;
      all_certified = false;
      any_divergent = any_divergent || e.divergence_evidence;
    }
    if (params.is_sup_case() && e.certified) {
      auto rb = detail::remainder_bound(x, A, k, 0.0, budget.cutoff + 1);
      rep.decay_bounds.emplace_back(budget.cutoff + 1, rb.value_or(kInf));
    }
    rep.per_k.push_back(e);
  }
  if (any_divergent)
    rep.verdict = "not a member (evidence)";
  else if (all_certified)
    rep.verdict = "certified member on window";
  else
    rep.verdict = "inconclusive";
  return rep;
}

/// Bundles everything needed to evaluate metric quantities.
struct SpaceContext {
  KotheMatrix A;
  SpaceParams params;
  Real metric_tol = 1e-12;
  TailBudget budget;

  MetricValue distance(const SequenceRep& x, const SequenceRep& y) const {
    return metric_d(x, y, params, A, metric_tol, budget);
  }
  MetricValue distance_from_zero(const SequenceRep& x) const {
    return metric_from_zero(x, params, A, metric_tol, budget);
  }
};

}  // namespace kothe
