#pragma once

/// Finite-horizon distributional statistics of orbit pairs under the
/// backward shift: the counting function of iterates whose orbit distance
/// stays below a threshold, finite-horizon surrogates for the lower/upper
/// distributional functions, and pairwise / family verdicts.
///
/// The liminf/limsup themselves are not computable; lower_est/upper_est are
/// the min/max of the per-horizon densities over a caller-supplied horizon
/// schedule. Iterates whose certified distance interval straddles a
/// threshold are reported as ambiguous and treated pessimistically for
/// whichever claim is being tested.

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kothe/sequence.hpp"
#include "kothe/shift.hpp"
#include "kothe/space.hpp"

namespace kothe {

struct PhiCount {
  Index below = 0;      // certainly d < t
  Index ambiguous = 0;  // certified interval [v, v+err] straddles t
};

/// Phi^{(n)}(t): iterates 0 <= i < n with d(B^i x, B^i y) < t (strict).
inline PhiCount phi_n(const SequenceRep& x, const SequenceRep& y, Index n, Real t,
                      const SpaceContext& ctx) {
  if (n < 1) throw EvaluationError("phi_n horizon must be >= 1");
  if (t <= 0) throw EvaluationError("phi_n threshold must be positive");
  PhiCount c;
  const SequenceRep diff = x - y;
  const bool identical = x.same_node(y);
  for (Index i = 0; i < n; ++i) {
    if (identical) {
      ++c.below;
      continue;
    }
    MetricValue d = ctx.distance_from_zero(diff.shifted(i));
    if (d.value + d.truncation_error_bound < t)
      ++c.below;
    else if (d.value < t)
      ++c.ambiguous;
  }
  return c;
}

struct DistributionalProfile {
  std::vector<Real> t_grid;       // ascending thresholds
  std::vector<Index> horizons;    // ascending horizons
  struct Row {
    Index n = 0;
    Real t = 0.0;
    Index count = 0;      // certainly below
    Index ambiguous = 0;
    Real ratio = 0.0;     // count / n
  };
  std::vector<Row> rows;  // horizon-major, threshold-minor

  const Row& row(std::size_t hi, std::size_t ti) const {
    return rows[hi * t_grid.size() + ti];
  }
  /// min over horizons of the pessimistic density ((count+ambiguous)/n).
  Real lower_est(std::size_t ti) const {
    Real m = 1.0;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      const Row& r = row(h, ti);
      m = std::min(m, static_cast<Real>(r.count + r.ambiguous) / static_cast<Real>(r.n));
    }
    return m;
  }
  /// max over horizons of the certain density (count/n).
  Real upper_est(std::size_t ti) const {
    Real m = 0.0;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      const Row& r = row(h, ti);
      m = std::max(m, r.ratio);
    }
    return m;
  }
};

/// One orbit pass filling the full (horizon, threshold) table incrementally.
inline DistributionalProfile profile(const SequenceRep& x, const SequenceRep& y,
                                     std::vector<Real> t_grid, std::vector<Index> horizons,
                                     const SpaceContext& ctx) {
  if (t_grid.empty() || horizons.empty())
    throw EvaluationError("profile grids must be nonempty");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()) ||
      std::adjacent_find(t_grid.begin(), t_grid.end()) != t_grid.end())
    throw EvaluationError("t_grid must be strictly ascending");
  if (!std::is_sorted(horizons.begin(), horizons.end()) ||
      std::adjacent_find(horizons.begin(), horizons.end()) != horizons.end())
    throw EvaluationError("horizons must be strictly ascending");
  if (t_grid.front() <= 0) throw EvaluationError("thresholds must be positive");
  if (horizons.front() < 1) throw EvaluationError("horizons must be >= 1");

  DistributionalProfile prof;
  prof.t_grid = std::move(t_grid);
  prof.horizons = std::move(horizons);

  const std::size_t T = prof.t_grid.size();
  std::vector<Index> below(T, 0), ambig(T, 0);
  const SequenceRep diff = x - y;
  const bool identical = x.same_node(y);
  std::size_t next_h = 0;
  for (Index i = 0; i < prof.horizons.back(); ++i) {
    if (identical) {
      for (std::size_t ti = 0; ti < T; ++ti) ++below[ti];
    } else {
      MetricValue d = ctx.distance_from_zero(diff.shifted(i));
      for (std::size_t ti = 0; ti < T; ++ti) {
        if (d.value + d.truncation_error_bound < prof.t_grid[ti])
          ++below[ti];
        else if (d.value < prof.t_grid[ti])
          ++ambig[ti];
      }
    }
    while (next_h < prof.horizons.size() && i + 1 == prof.horizons[next_h]) {
      for (std::size_t ti = 0; ti < T; ++ti) {
        DistributionalProfile::Row r;
        r.n = prof.horizons[next_h];
        r.t = prof.t_grid[ti];
        r.count = below[ti];
        r.ambiguous = ambig[ti];
        r.ratio = static_cast<Real>(r.count) / static_cast<Real>(r.n);
        prof.rows.push_back(r);
      }
      ++next_h;
    }
  }
  return prof;
}

/// CSV with header n,t,count,ratio,ambiguous at full decimal precision.
inline std::string profile_to_csv(const DistributionalProfile& prof) {
  std::ostringstream os;
  os << "n,t,count,ratio,ambiguous\n";
  os << std::setprecision(17);
  for (const auto& r : prof.rows)
    os << r.n << "," << r.t << "," << r.count << "," << r.ratio << "," << r.ambiguous << "\n";
  return os.str();
}

enum class PairVerdictKind { ConsistentWithDCPair, RefutedAtHorizon, Inconclusive };

inline std::string to_string(PairVerdictKind v) {
  switch (v) {
    case PairVerdictKind::ConsistentWithDCPair: return "consistent_with_DC_pair";
    case PairVerdictKind::RefutedAtHorizon: return "refuted_at_horizon";
    case PairVerdictKind::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct PairVerdict {
  Real epsilon = 0.0;
  Real eta = 0.1;
  bool proximality_ok = false;  // upper_est(t) >= 1-eta for every t in the grid
  bool separation_ok = false;   // lower_est(epsilon) <= eta
  Real worst_upper_est = 1.0;   // min over t of upper_est(t)
  Real lower_est_at_epsilon = 1.0;
  std::vector<Index> horizons;
  PairVerdictKind verdict = PairVerdictKind::Inconclusive;
};

/// Classifies a single orbit pair against the distributional chaos template
/// at finite horizons. Refutation is reserved for pairs that are not
/// actually distinct; everything else is at most "inconclusive".
inline PairVerdict classify_pair(const SequenceRep& x, const SequenceRep& y, Real epsilon,
                                 const std::vector<Real>& t_grid,
                                 const std::vector<Index>& horizons, Real eta,
                                 const SpaceContext& ctx) {
  if (!(eta > 0 && eta < 1)) throw EvaluationError("eta must lie in (0,1)");
  auto it = std::find(t_grid.begin(), t_grid.end(), epsilon);
  if (it == t_grid.end()) throw EvaluationError("epsilon must be a t_grid entry");
  const std::size_t eps_idx = static_cast<std::size_t>(it - t_grid.begin());

  PairVerdict v;
  v.epsilon = epsilon;
  v.eta = eta;
  v.horizons = horizons;
  if (x.same_node(y)) {
    // a DC pair must be distinct; Phi(eps)=0 is impossible for x=y
    v.verdict = PairVerdictKind::RefutedAtHorizon;
    v.lower_est_at_epsilon = 1.0;
    return v;
  }

  DistributionalProfile prof = profile(x, y, t_grid, horizons, ctx);
  v.proximality_ok = true;
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    Real ue = prof.upper_est(ti);
    v.worst_upper_est = std::min(v.worst_upper_est, ue);
    if (ue < 1.0 - eta) v.proximality_ok = false;
  }
  v.lower_est_at_epsilon = prof.lower_est(eps_idx);
  v.separation_ok = v.lower_est_at_epsilon <= eta;
  v.verdict = (v.proximality_ok && v.separation_ok) ? PairVerdictKind::ConsistentWithDCPair
                                                    : PairVerdictKind::Inconclusive;
  return v;
}

struct FamilyMember {
  Real alpha = 0.0;
  Index offset = 0;
  SequenceRep seq;

  std::string label() const {
    return "B^" + std::to_string(offset) + "(" + std::to_string(alpha) + "*nu_bar)";
  }
};

struct FamilyPairResult {
  std::size_t i = 0, j = 0;
  PairVerdict verdict;
};

struct FamilyReport {
  std::vector<FamilyPairResult> pairs;
  std::size_t refuted = 0, consistent = 0, inconclusive = 0;
  std::optional<std::size_t> worst_pair;  // index into pairs (highest lower_est at epsilon)
  std::string note;
};

/// Samples pair_budget distinct pairs (deterministic seed) and classifies
/// each. Duplicate generators refute the family outright.
inline FamilyReport verify_scrambled_family(const std::vector<FamilyMember>& members,
                                            std::size_t pair_budget, Real epsilon,
                                            const std::vector<Real>& t_grid,
                                            const std::vector<Index>& horizons, Real eta,
                                            const SpaceContext& ctx, std::uint64_t seed = 0) {
  if (members.empty()) throw EvaluationError("family is empty");
  if (pair_budget < 1) throw EvaluationError("pair budget must be >= 1");
  FamilyReport rep;

  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j)
      if (members[i].alpha == members[j].alpha && members[i].offset == members[j].offset) {
        FamilyPairResult r;
        r.i = i;
        r.j = j;
        r.verdict.verdict = PairVerdictKind::RefutedAtHorizon;
        rep.pairs.push_back(r);
        rep.refuted = 1;
        rep.note = "duplicate generators";
        return rep;
      }

  if (members.size() == 1) {
    rep.note = "single member: vacuously consistent, zero pairs checked";
    return rep;
  }

  std::vector<std::pair<std::size_t, std::size_t>> all_pairs;
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j) all_pairs.emplace_back(i, j);
  if (all_pairs.size() > pair_budget) {
    std::mt19937_64 rng(seed);
    std::shuffle(all_pairs.begin(), all_pairs.end(), rng);
    all_pairs.resize(pair_budget);
    std::sort(all_pairs.begin(), all_pairs.end());
  }

  Real worst = -1.0;
  for (const auto& [i, j] : all_pairs) {
    FamilyPairResult r;
    r.i = i;
    r.j = j;
    r.verdict = classify_pair(members[i].seq, members[j].seq, epsilon, t_grid, horizons, eta, ctx);
    switch (r.verdict.verdict) {
      case PairVerdictKind::RefutedAtHorizon: ++rep.refuted; break;
      case PairVerdictKind::ConsistentWithDCPair: ++rep.consistent; break;
      case PairVerdictKind::Inconclusive: ++rep.inconclusive; break;
    }
    rep.pairs.push_back(r);
    if (r.verdict.lower_est_at_epsilon > worst) {
      worst = r.verdict.lower_est_at_epsilon;
      rep.worst_pair = rep.pairs.size() - 1;
    }
  }
  return rep;
}

}  // namespace kothe
