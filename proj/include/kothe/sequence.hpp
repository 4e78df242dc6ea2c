#pragma once

/// Lazy scalar-sequence representations.
///
/// A SequenceRep is an immutable value handle over a node tree. Views
/// (shift, window, tail, sums, scalings) never materialize coordinates;
/// evaluation at an index walks the tree. Every node also answers two
/// certification queries used by the seminorm engine:
///   support_end(): an index beyond which the sequence is identically zero
///   abs_bound(from): a certified upper bound on sup_{i>=from} |x_i|

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kothe {

using Index = std::uint64_t;  // 1-based coordinate index
using Real = double;

inline constexpr Real kInf = std::numeric_limits<Real>::infinity();

class UncertifiedTailError : public std::runtime_error {
 public:
  explicit UncertifiedTailError(const std::string& what)
      : std::runtime_error("uncertified tail: " + what) {}
};

class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& what)
      : std::runtime_error("evaluation error: " + what) {}
};

namespace detail {

struct SeqNode {
  virtual ~SeqNode() = default;
  virtual Real at(Index j) const = 0;
  virtual std::optional<Index> support_end() const = 0;
  virtual Real abs_bound(Index from) const = 0;
  virtual std::string describe() const = 0;
};

using NodePtr = std::shared_ptr<const SeqNode>;

struct ZeroNode final : SeqNode {
  Real at(Index) const override { return 0.0; }
  std::optional<Index> support_end() const override { return Index{0}; }
  Real abs_bound(Index) const override { return 0.0; }
  std::string describe() const override { return "zero"; }
};

struct ConstantNode final : SeqNode {
  Real c;
  explicit ConstantNode(Real v) : c(v) {}
  Real at(Index) const override { return c; }
  std::optional<Index> support_end() const override {
    return c == 0.0 ? std::optional<Index>(Index{0}) : std::nullopt;
  }
  Real abs_bound(Index) const override { return std::abs(c); }
  std::string describe() const override { return "constant(" + std::to_string(c) + ")"; }
};

struct GeometricNode final : SeqNode {
  Real r;  // x_j = r^(j-1), r > 0
  explicit GeometricNode(Real ratio) : r(ratio) {}
  Real at(Index j) const override { return std::pow(r, static_cast<Real>(j - 1)); }
  std::optional<Index> support_end() const override { return std::nullopt; }
  Real abs_bound(Index from) const override {
    if (r <= 1.0) return std::pow(r, static_cast<Real>(from - 1));
    return kInf;
  }
  std::string describe() const override { return "geometric(" + std::to_string(r) + ")"; }
};

struct FiniteSupportNode final : SeqNode {
  // sorted by index, no duplicates, no explicit zeros
  std::vector<std::pair<Index, Real>> entries;
  explicit FiniteSupportNode(std::vector<std::pair<Index, Real>> e) : entries(std::move(e)) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < entries.size(); ++i)
      if (entries[i].first == entries[i - 1].first)
        throw EvaluationError("duplicate index in finite-support sequence");
  }
  Real at(Index j) const override {
    auto it = std::lower_bound(entries.begin(), entries.end(), j,
                               [](const auto& e, Index v) { return e.first < v; });
    return (it != entries.end() && it->first == j) ? it->second : 0.0;
  }
  std::optional<Index> support_end() const override {
    return entries.empty() ? Index{0} : entries.back().first;
  }
  Real abs_bound(Index from) const override {
    Real b = 0.0;
    for (auto it = entries.rbegin(); it != entries.rend() && it->first >= from; ++it)
      b = std::max(b, std::abs(it->second));
    return b;
  }
  std::string describe() const override {
    return "finite_support(" + std::to_string(entries.size()) + " entries)";
  }
};

// Indicator of an explicit index set, scaled by a constant.
struct IndicatorNode final : SeqNode {
  std::vector<std::pair<Index, Index>> intervals;  // closed [lo, hi], sorted, disjoint
  Real value;
  IndicatorNode(std::vector<std::pair<Index, Index>> iv, Real v)
      : intervals(std::move(iv)), value(v) {
    std::sort(intervals.begin(), intervals.end());
  }
  Real at(Index j) const override {
    auto it = std::upper_bound(intervals.begin(), intervals.end(),
                               std::make_pair(j, std::numeric_limits<Index>::max()));
    if (it == intervals.begin()) return 0.0;
    --it;
    return (j >= it->first && j <= it->second) ? value : 0.0;
  }
  std::optional<Index> support_end() const override {
    Index e = 0;
    for (const auto& iv : intervals) e = std::max(e, iv.second);
    return e;
  }
  Real abs_bound(Index from) const override {
    for (const auto& iv : intervals)
      if (iv.second >= from) return std::abs(value);
    return 0.0;
  }
  std::string describe() const override { return "indicator"; }
};

struct RuleNode final : SeqNode {
  std::function<Real(Index)> fn;
  std::optional<Index> end;
  Real bound;  // sup over all indices
  std::string name;
  RuleNode(std::function<Real(Index)> f, std::optional<Index> e, Real b, std::string n)
      : fn(std::move(f)), end(e), bound(b), name(std::move(n)) {}
  Real at(Index j) const override { return fn(j); }
  std::optional<Index> support_end() const override { return end; }
  Real abs_bound(Index from) const override {
    if (end && from > *end) return 0.0;
    return bound;
  }
  std::string describe() const override { return name; }
};

struct ScaledNode final : SeqNode {
  NodePtr base;
  Real s;
  ScaledNode(NodePtr b, Real scale) : base(std::move(b)), s(scale) {}
  Real at(Index j) const override { return s * base->at(j); }
  std::optional<Index> support_end() const override {
    if (s == 0.0) return Index{0};
    return base->support_end();
  }
  Real abs_bound(Index from) const override { return std::abs(s) * base->abs_bound(from); }
  std::string describe() const override {
    return std::to_string(s) + "*" + base->describe();
  }
};

struct SumNode final : SeqNode {
  NodePtr a, b;
  Real sign;  // +1 for sum, -1 for difference
  SumNode(NodePtr x, NodePtr y, Real sg) : a(std::move(x)), b(std::move(y)), sign(sg) {}
  Real at(Index j) const override { return a->at(j) + sign * b->at(j); }
  std::optional<Index> support_end() const override {
    auto ea = a->support_end();
    auto eb = b->support_end();
    if (ea && eb) return std::max(*ea, *eb);
    return std::nullopt;
  }
  Real abs_bound(Index from) const override {
    return a->abs_bound(from) + b->abs_bound(from);
  }
  std::string describe() const override {
    return "(" + a->describe() + (sign > 0 ? " + " : " - ") + b->describe() + ")";
  }
};

// x(k): coordinates shifted, j -> base[j + k]
struct ShiftNode final : SeqNode {
  NodePtr base;
  Index k;
  ShiftNode(NodePtr b, Index off) : base(std::move(b)), k(off) {}
  Real at(Index j) const override { return base->at(j + k); }
  std::optional<Index> support_end() const override {
    auto e = base->support_end();
    if (!e) return std::nullopt;
    return (*e > k) ? (*e - k) : Index{0};
  }
  Real abs_bound(Index from) const override { return base->abs_bound(from + k); }
  std::string describe() const override {
    return base->describe() + "(" + std::to_string(k) + ")";
  }
};

// x(k, n): coordinates 1..n are base[k+1..k+n], zero beyond
struct WindowNode final : SeqNode {
  NodePtr base;
  Index k, n;
  WindowNode(NodePtr b, Index off, Index len) : base(std::move(b)), k(off), n(len) {}
  Real at(Index j) const override { return j <= n ? base->at(j + k) : 0.0; }
  std::optional<Index> support_end() const override {
    auto e = base->support_end();
    Index w = n;
    if (e) w = std::min(w, (*e > k) ? (*e - k) : Index{0});
    return w;
  }
  Real abs_bound(Index from) const override {
    if (from > n) return 0.0;
    return base->abs_bound(from + k);
  }
  std::string describe() const override {
    return base->describe() + "(" + std::to_string(k) + "," + std::to_string(n) + ")";
  }
};

// x[k, n]: n leading zeros, then base[k+n+1], base[k+n+2], ...
struct TailNode final : SeqNode {
  NodePtr base;
  Index k, n;
  TailNode(NodePtr b, Index off, Index len) : base(std::move(b)), k(off), n(len) {}
  Real at(Index j) const override { return j > n ? base->at(j + k) : 0.0; }
  std::optional<Index> support_end() const override {
    auto e = base->support_end();
    if (!e) return std::nullopt;
    return (*e > k) ? (*e - k) : Index{0};
  }
  Real abs_bound(Index from) const override {
    Index f = std::max(from, n + 1);
    return base->abs_bound(f + k);
  }
  std::string describe() const override {
    return base->describe() + "[" + std::to_string(k) + "," + std::to_string(n) + "]";
  }
};

// Coordinatewise diagonal map x_j -> m(j) * x_j.
struct DiagonalNode final : SeqNode {
  NodePtr base;
  std::function<Real(Index)> mult;
  std::string name;
  DiagonalNode(NodePtr b, std::function<Real(Index)> m, std::string n)
      : base(std::move(b)), mult(std::move(m)), name(std::move(n)) {}
  Real at(Index j) const override { return mult(j) * base->at(j); }
  std::optional<Index> support_end() const override { return base->support_end(); }
  Real abs_bound(Index) const override { return kInf; }  // multiplier may grow
  std::string describe() const override { return name + "*" + base->describe(); }
};

}  // namespace detail

class SequenceRep {
 public:
  SequenceRep() : node_(std::make_shared<detail::ZeroNode>()) {}
  explicit SequenceRep(detail::NodePtr n) : node_(std::move(n)) {}

  Real at(Index j) const {
    if (j == 0) throw EvaluationError("sequence index must be >= 1");
    return node_->at(j);
  }
  /// Index beyond which the sequence is provably zero (nullopt: unbounded).
  std::optional<Index> support_end() const { return node_->support_end(); }
  /// Certified sup_{i>=from} |x_i|; +inf when no bound is known.
  Real abs_bound(Index from = 1) const { return node_->abs_bound(from); }
  std::string describe() const { return node_->describe(); }
  bool same_node(const SequenceRep& o) const { return node_ == o.node_; }

  static SequenceRep zero() { return SequenceRep(std::make_shared<detail::ZeroNode>()); }
  static SequenceRep constant(Real c) {
    return SequenceRep(std::make_shared<detail::ConstantNode>(c));
  }
  static SequenceRep all_ones() { return constant(1.0); }
  static SequenceRep unit(Index j, Real v = 1.0) {
    return finite_support({{j, v}});
  }
  static SequenceRep finite_support(std::vector<std::pair<Index, Real>> e) {
    return SequenceRep(std::make_shared<detail::FiniteSupportNode>(std::move(e)));
  }
  static SequenceRep geometric(Real r) {
    if (r <= 0) throw EvaluationError("geometric ratio must be positive");
    return SequenceRep(std::make_shared<detail::GeometricNode>(r));
  }
  static SequenceRep indicator(std::vector<std::pair<Index, Index>> intervals, Real v = 1.0) {
    return SequenceRep(std::make_shared<detail::IndicatorNode>(std::move(intervals), v));
  }
  static SequenceRep from_rule(std::function<Real(Index)> fn, std::optional<Index> support_end,
                               Real abs_bound, std::string name) {
    return SequenceRep(
        std::make_shared<detail::RuleNode>(std::move(fn), support_end, abs_bound,
                                           std::move(name)));
  }

  SequenceRep scaled(Real s) const {
    return SequenceRep(std::make_shared<detail::ScaledNode>(node_, s));
  }
  SequenceRep plus(const SequenceRep& o) const {
    return SequenceRep(std::make_shared<detail::SumNode>(node_, o.node_, +1.0));
  }
  SequenceRep minus(const SequenceRep& o) const {
    return SequenceRep(std::make_shared<detail::SumNode>(node_, o.node_, -1.0));
  }
  SequenceRep shifted(Index k) const {
    if (k == 0) return *this;
    return SequenceRep(std::make_shared<detail::ShiftNode>(node_, k));
  }
  SequenceRep window_view(Index k, Index n) const {
    return SequenceRep(std::make_shared<detail::WindowNode>(node_, k, n));
  }
  SequenceRep tail_view(Index k, Index n) const {
    return SequenceRep(std::make_shared<detail::TailNode>(node_, k, n));
  }
  SequenceRep diagonal(std::function<Real(Index)> mult, std::string name) const {
    return SequenceRep(
        std::make_shared<detail::DiagonalNode>(node_, std::move(mult), std::move(name)));
  }

 private:
  detail::NodePtr node_;
};

inline SequenceRep operator+(const SequenceRep& a, const SequenceRep& b) { return a.plus(b); }
inline SequenceRep operator-(const SequenceRep& a, const SequenceRep& b) { return a.minus(b); }
inline SequenceRep operator*(Real s, const SequenceRep& x) { return x.scaled(s); }

}  // namespace kothe
