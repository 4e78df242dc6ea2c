#pragma once

/// Köthe matrices A = (a_{j,k}): nonnegative, nondecreasing in k, every row
/// eventually positive. Generators carry closed-form tail oracles so that
/// seminorm computations can certify the discarded remainder.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kothe/sequence.hpp"

namespace kothe {

class KotheMatrix {
 public:
  enum class Kind { Constant, Geometric, Power, Tabulated, DiagScaled };

  /// a_{j,k} = c
  static KotheMatrix constant(Real c) {
    KotheMatrix m;
    m.kind_ = Kind::Constant;
    m.param_ = c;
    return m;
  }
  /// a_{j,k} = r^{j-1}
  static KotheMatrix geometric(Real r) {
    KotheMatrix m;
    m.kind_ = Kind::Geometric;
    m.param_ = r;
    return m;
  }
  /// a_{j,k} = j^k
  static KotheMatrix power() {
    KotheMatrix m;
    m.kind_ = Kind::Power;
    return m;
  }
  /// finite grid, rows j = 1..grid.size(), columns k = 1..grid[j-1].size()
  static KotheMatrix tabulated(std::vector<std::vector<Real>> grid) {
    KotheMatrix m;
    m.kind_ = Kind::Tabulated;
    m.grid_ = std::move(grid);
    return m;
  }
  /// a'_{j,k} = base(j,k) * scale(j); used by the weighted-shift reduction.
  static KotheMatrix diag_scaled(KotheMatrix base, std::function<Real(Index)> scale,
                                 std::string scale_name) {
    KotheMatrix m;
    m.kind_ = Kind::DiagScaled;
    m.base_ = std::make_shared<KotheMatrix>(std::move(base));
    m.scale_ = std::move(scale);
    m.scale_name_ = std::move(scale_name);
    return m;
  }

  Kind kind() const { return kind_; }

  Real entry(Index j, Index k) const {
    if (j == 0 || k == 0) throw EvaluationError("matrix indices are 1-based");
    switch (kind_) {
      case Kind::Constant:
        return param_;
      case Kind::Geometric: {
        Real v = std::pow(param_, static_cast<Real>(j - 1));
        if (!std::isfinite(v))
          throw EvaluationError("geometric entry overflow at (" + std::to_string(j) + "," +
                                std::to_string(k) + ")");
        return v;
      }
      case Kind::Power: {
        Real v = std::pow(static_cast<Real>(j), static_cast<Real>(k));
        if (!std::isfinite(v))
          throw EvaluationError("power entry overflow at (" + std::to_string(j) + "," +
                                std::to_string(k) + ")");
        return v;
      }
      case Kind::Tabulated: {
        if (j > grid_.size() || k > grid_[j - 1].size())
          throw EvaluationError("tabulated entry outside validity window at (" +
                                std::to_string(j) + "," + std::to_string(k) + ")");
        return grid_[j - 1][k - 1];
      }
      case Kind::DiagScaled:
        return base_->entry(j, k) * scale_(j);
    }
    throw EvaluationError("unknown matrix kind");
  }

  /// True when a_{j,k} does not depend on k (all seminorms coincide).
  bool k_independent() const {
    switch (kind_) {
      case Kind::Constant:
      case Kind::Geometric:
        return true;
      case Kind::DiagScaled:
        return base_->k_independent();
      default:
        return false;
    }
  }

  /// Certified upper bound on sum_{j>=from} a_{j,k}^p, or nullopt when no
  /// finite closed form is known.
  std::optional<Real> tail_power_sum(Index k, Index from, Real p) const {
    switch (kind_) {
      case Kind::Geometric: {
        Real rp = std::pow(param_, p);
        if (rp >= 1.0) return std::nullopt;
        // sum_{j>=from} r^{p(j-1)} = r^{p(from-1)} / (1 - r^p)
        return std::pow(param_, p * static_cast<Real>(from - 1)) / (1.0 - rp);
      }
      case Kind::Constant:
      case Kind::Power:
      case Kind::Tabulated:
        return std::nullopt;
      case Kind::DiagScaled:
        return scaled_tail_power_sum(k, from, p);
    }
    return std::nullopt;
  }

  /// Certified upper bound on sup_{j>=from} a_{j,k}, or nullopt.
  std::optional<Real> tail_sup(Index k, Index from) const {
    switch (kind_) {
      case Kind::Geometric:
        if (param_ >= 1.0) return std::nullopt;
        return std::pow(param_, static_cast<Real>(from - 1));
      case Kind::Constant:
        return param_;
      case Kind::Power:
      case Kind::Tabulated:
        return std::nullopt;
      case Kind::DiagScaled: {
        if (!scale_tail_sup_) return std::nullopt;
        auto base = base_->tail_sup(k, from);
        if (!base) return std::nullopt;
        return *base * scale_tail_sup_(from);
      }
    }
    return std::nullopt;
  }

  /// Closed-form global bound on sup_j a_{j,n}/a_{j+1,m}, when the generator
  /// admits one (tabulated matrices provide window evidence only).
  std::optional<Real> continuity_global_bound(Index n, Index m) const {
    switch (kind_) {
      case Kind::Constant:
        return param_ > 0 ? std::optional<Real>(1.0) : std::nullopt;
      case Kind::Geometric:
        return 1.0 / param_;
      case Kind::Power:
        // j^n / (j+1)^m <= j^n / j^m <= 1 for m >= n
        return m >= n ? std::optional<Real>(1.0) : std::nullopt;
      default:
        return std::nullopt;
    }
  }

  /// Registers a certified bound on sup_{j>=from} scale(j) for DiagScaled
  /// matrices (needed for p=0 tail certificates).
  void set_scale_tail_sup(std::function<Real(Index)> f) { scale_tail_sup_ = std::move(f); }

  std::string describe() const {
    std::ostringstream os;
    switch (kind_) {
      case Kind::Constant: os << "constant(" << param_ << ")"; break;
      case Kind::Geometric: os << "geometric(" << param_ << ")"; break;
      case Kind::Power: os << "power"; break;
      case Kind::Tabulated: os << "tabulated(" << grid_.size() << " rows)"; break;
      case Kind::DiagScaled: os << scale_name_ << "*" << base_->describe(); break;
    }
    return os.str();
  }

 private:
  std::optional<Real> scaled_tail_power_sum(Index k, Index from, Real p) const {
    // Only usable when the scale is bounded on [from, inf); the weighted
    // reduction with nonincreasing 1/v_j satisfies this.
    if (!scale_tail_sup_) return std::nullopt;
    auto base = base_->tail_power_sum(k, from, p);
    if (!base) return std::nullopt;
    return *base * std::pow(scale_tail_sup_(from), p);
  }

  Kind kind_ = Kind::Constant;
  Real param_ = 1.0;
  std::vector<std::vector<Real>> grid_;
  std::shared_ptr<KotheMatrix> base_;
  std::function<Real(Index)> scale_;
  std::function<Real(Index)> scale_tail_sup_;
  std::string scale_name_;
};

struct MatrixViolation {
  std::string code;  // "negative_entry" | "non_monotone" | "zero_row" | "evaluation_error"
  Index j = 0;
  Index k = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<MatrixViolation> violations;
  Index j_max = 0;
  Index k_max = 0;
  bool valid_on_window() const { return violations.empty(); }
};

/// Checks the Köthe-matrix axioms on the window j<=j_max, k<=k_max.
inline ValidationReport validate_kothe(const KotheMatrix& A, Index j_max, Index k_max) {
  if (j_max < 1 || k_max < 1) throw EvaluationError("validation window must be nonempty");
  ValidationReport rep;
  rep.j_max = j_max;
  rep.k_max = k_max;
  for (Index j = 1; j <= j_max; ++j) {
    bool row_positive = false;
    Real prev = 0.0;
    bool have_prev = false;
    for (Index k = 1; k <= k_max; ++k) {
      Real v;
      try {
        v = A.entry(j, k);
      } catch (const EvaluationError& e) {
        rep.violations.push_back({"evaluation_error", j, k, e.what()});
        have_prev = false;
        continue;
      }
      if (v < 0.0)
        rep.violations.push_back({"negative_entry", j, k,
                                  "negative entry at (" + std::to_string(j) + "," +
                                      std::to_string(k) + ")"});
      if (have_prev && v < prev)
        rep.violations.push_back({"non_monotone", j, k,
                                  "entry decreases from column " + std::to_string(k - 1) +
                                      " to " + std::to_string(k) + " in row " +
                                      std::to_string(j)});
      if (v > 0.0) row_positive = true;
      prev = v;
      have_prev = true;
    }
    if (!row_positive)
      rep.violations.push_back({"zero_row", j, 0,
                                "no positive entry found in window for j=" + std::to_string(j)});
  }
  return rep;
}

}  // namespace kothe
