#pragma once

/// The backward shift and its windowed/tail views, plus the reduction of a
/// weighted backward shift to the unweighted one over a rescaled matrix.

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "kothe/matrix.hpp"
#include "kothe/sequence.hpp"
#include "kothe/space.hpp"

namespace kothe {

/// B(x_1, x_2, ...) = (x_2, x_3, ...)
inline SequenceRep backward_shift(const SequenceRep& x) { return x.shifted(1); }

/// x(k) = B^k(x)
inline SequenceRep iterate(const SequenceRep& x, Index k) { return x.shifted(k); }

/// x(k, n): the first n coordinates of B^k(x), zero-padded.
inline SequenceRep window(const SequenceRep& x, Index k, Index n) {
  return x.window_view(k, n);
}

/// x[k, n]: n leading zeros, then the coordinates of B^k(x) past position n.
inline SequenceRep tail(const SequenceRep& x, Index k, Index n) { return x.tail_view(k, n); }

/// Strictly positive weights w_i (i >= 2) with cumulative products
/// v_1 = 1, v_j = prod_{i=2..j} w_i. Products are cached iteratively up to a
/// cache limit; past it v_j is reconstructed from the cumulative log, which
/// keeps astronomically large j representable without overflow of the
/// intermediate products.
class WeightSequence {
 public:
  static WeightSequence constant(Real c) {
    if (c <= 0) throw EvaluationError("weights must be strictly positive");
    WeightSequence w;
    w.const_ = c;
    return w;
  }
  static WeightSequence tabulated(std::vector<Real> weights_from_2) {
    WeightSequence w;
    for (Real wi : weights_from_2)
      if (wi <= 0) throw EvaluationError("weights must be strictly positive");
    w.table_ = std::move(weights_from_2);
    return w;
  }

  Real w(Index i) const {
    if (i < 2) throw EvaluationError("weights are defined for i >= 2");
    if (!table_.empty()) {
      if (i - 2 >= table_.size())
        throw EvaluationError("tabulated weight index out of range");
      return table_[i - 2];
    }
    return const_;
  }

  Real v(Index j) const {
    if (j == 0) throw EvaluationError("cumulative weight index is 1-based");
    if (j == 1) return 1.0;
    if (!table_.empty()) {
      Real p = 1.0;
      for (Index i = 2; i <= j; ++i) p *= w(i);
      return p;
    }
    if (j <= kCacheLimit) {
      Real p = 1.0;
      for (Index i = 2; i <= j; ++i) p *= const_;
      return p;
    }
    return std::exp(static_cast<Real>(j - 1) * std::log(const_));
  }

  Real log_v(Index j) const {
    if (!table_.empty()) {
      Real s = 0.0;
      for (Index i = 2; i <= j; ++i) s += std::log(w(i));
      return s;
    }
    return static_cast<Real>(j - 1) * std::log(const_);
  }

  bool nonincreasing_inverse() const {
    // 1/v_j nonincreasing in j iff all weights >= 1
    if (!table_.empty())
      return std::all_of(table_.begin(), table_.end(), [](Real x) { return x >= 1.0; });
    return const_ >= 1.0;
  }

  std::string describe() const {
    return table_.empty() ? "constant(" + std::to_string(const_) + ")" : "tabulated";
  }

 private:
  static constexpr Index kCacheLimit = 1u << 12;
  Real const_ = 1.0;
  std::vector<Real> table_;
};

struct WeightedReduction {
  KotheMatrix conjugated_matrix;  // a'_{j,k} = a_{j,k} / v_j
  WeightSequence weights;

  /// phi(x)_j = v_j x_j; intertwines B_w with B and is a seminorm isometry
  /// between lambda_p(A) and lambda_p(A').
  SequenceRep phi(const SequenceRep& x) const {
    const WeightSequence w = weights;
    return x.diagonal([w](Index j) { return w.v(j); }, "v");
  }

  /// B_w(x)_j = w_{j+1} x_{j+1}
  SequenceRep weighted_shift(const SequenceRep& x) const {
    const WeightSequence w = weights;
    return x.shifted(1).diagonal([w](Index j) { return w.w(j + 1); }, "w");
  }
};

/// Reduction of the weighted backward shift to the unweighted case: the
/// conjugation phi(x)_j = v_j x_j carries B_w on lambda_p(A) to B on
/// lambda_p(A') with a'_{j,k} = a_{j,k}/v_j.
inline WeightedReduction weighted_to_unweighted(const WeightSequence& w, const KotheMatrix& A) {
  const WeightSequence wc = w;
  KotheMatrix scaled =
      KotheMatrix::diag_scaled(A, [wc](Index j) { return 1.0 / wc.v(j); }, "1/v");
  if (w.nonincreasing_inverse()) {
    scaled.set_scale_tail_sup([wc](Index from) { return 1.0 / wc.v(from); });
  }
  return WeightedReduction{std::move(scaled), w};
}

}  // namespace kothe
