#pragma once

// Transversally 1-periodic configurations (functions of the first lattice
// coordinate only), represented on a finite window with constant tails.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "fkmt/errors.hpp"

namespace fkmt {

/// Closed integer interval [lo, hi].
struct Window {
  int lo = 0;
  int hi = 0;

  [[nodiscard]] int size() const { return hi - lo + 1; }
  [[nodiscard]] bool contains(int i) const { return lo <= i && i <= hi; }
  [[nodiscard]] bool contains(const Window& w) const { return lo <= w.lo && w.hi <= hi; }
  friend bool operator==(const Window&, const Window&) = default;
};

/// u(i) for every integer i: `values` on [lo, hi], `left_tail` below, `right_tail` above.
class ChainConfig {
public:
  ChainConfig() = default;

  ChainConfig(int lo, std::vector<double> values, double left_tail, double right_tail)
      : lo_(lo), values_(std::move(values)), left_(left_tail), right_(right_tail) {
    if (values_.empty()) throw InvalidArgument("ChainConfig: empty window");
    for (double v : values_)
      if (!std::isfinite(v)) throw InvalidArgument("ChainConfig: non-finite value");
    if (!std::isfinite(left_) || !std::isfinite(right_))
      throw InvalidArgument("ChainConfig: non-finite tail");
  }

  static ChainConfig constant(double value, Window w) {
    return {w.lo, std::vector<double>(static_cast<std::size_t>(w.size()), value), value, value};
  }

  /// Samples `u` on window `w`; tails are kept.
  static ChainConfig resample(const ChainConfig& u, Window w) {
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(w.size()));
    for (int i = w.lo; i <= w.hi; ++i) vals.push_back(u(i));
    return {w.lo, std::move(vals), u.left_tail(), u.right_tail()};
  }

  [[nodiscard]] int lo() const { return lo_; }
  [[nodiscard]] int hi() const { return lo_ + static_cast<int>(values_.size()) - 1; }
  [[nodiscard]] Window window() const { return {lo(), hi()}; }
  [[nodiscard]] double left_tail() const { return left_; }
  [[nodiscard]] double right_tail() const { return right_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

  [[nodiscard]] double operator()(int i) const {
    if (i < lo_) return left_;
    if (i > hi()) return right_;
    return values_[static_cast<std::size_t>(i - lo_)];
  }

  /// Writable access inside the window only.
  double& at(int i) {
    if (i < lo_ || i > hi()) throw InvalidArgument("ChainConfig::at: site outside window");
    return values_[static_cast<std::size_t>(i - lo_)];
  }

  friend bool operator==(const ChainConfig&, const ChainConfig&) = default;

private:
  int lo_ = 0;
  std::vector<double> values_{0.0};
  double left_ = 0.0;
  double right_ = 0.0;
};

/// Adjacent constant minimizers v0 < w0 and the gap width rho_bar = w0 - v0.
struct GapPair {
  double v0 = 0.0;
  double w0 = 1.0;
  double rho_bar = 1.0;

  static GapPair make(double v0, double w0) {
    if (!(v0 < w0)) throw InvalidArgument("GapPair: need v0 < w0");
    return {v0, w0, w0 - v0};
  }
  friend bool operator==(const GapPair&, const GapPair&) = default;
};

enum class Ordering { Less, Equal, Greater, Crossing };

inline const char* to_string(Ordering o) {
  switch (o) {
    case Ordering::Less: return "LESS";
    case Ordering::Equal: return "EQUAL";
    case Ordering::Greater: return "GREATER";
    case Ordering::Crossing: return "CROSSING";
  }
  return "?";
}

inline constexpr double kDefaultOrderTol = 1e-9;

/// Shift along the first coordinate: result(i) = u(i + k).
inline ChainConfig shift(const ChainConfig& u, int k) {
  return {u.lo() - k, u.values(), u.left_tail(), u.right_tail()};
}

inline Window union_window(const ChainConfig& u, const ChainConfig& v) {
  return {std::min(u.lo(), v.lo()), std::max(u.hi(), v.hi())};
}

/// Partial order of two configurations up to `eps_ord`. `r` is the interaction
/// range; the comparison runs over the union window plus 2r tail sites per side,
/// beyond which both configurations are constant.
inline Ordering compare(const ChainConfig& u, const ChainConfig& v, double eps_ord = kDefaultOrderTol,
                        int r = 1) {
  if (eps_ord < 0.0) throw InvalidArgument("compare: eps_ord must be >= 0");
  const Window w = union_window(u, v);
  bool below = false;  // some site with u < v - eps
  bool above = false;  // some site with u > v + eps
  for (int i = w.lo - 2 * r; i <= w.hi + 2 * r; ++i) {
    const double d = u(i) - v(i);
    if (d < -eps_ord) below = true;
    if (d > eps_ord) above = true;
  }
  if (below && above) return Ordering::Crossing;
  if (below) return Ordering::Less;
  if (above) return Ordering::Greater;
  return Ordering::Equal;
}

/// Sitewise (min(u, v), max(u, v)) over the union window, tails combined sitewise.
inline std::pair<ChainConfig, ChainConfig> pointwise_min_max(const ChainConfig& u, const ChainConfig& v) {
  const Window w = union_window(u, v);
  std::vector<double> mn, mx;
  mn.reserve(static_cast<std::size_t>(w.size()));
  mx.reserve(static_cast<std::size_t>(w.size()));
  for (int i = w.lo; i <= w.hi; ++i) {
    mn.push_back(std::min(u(i), v(i)));
    mx.push_back(std::max(u(i), v(i)));
  }
  return {ChainConfig(w.lo, std::move(mn), std::min(u.left_tail(), v.left_tail()),
                      std::min(u.right_tail(), v.right_tail())),
          ChainConfig(w.lo, std::move(mx), std::max(u.left_tail(), v.left_tail()),
                      std::max(u.right_tail(), v.right_tail()))};
}

/// sup_i |u(i) - v(i)| over the union window (tails included through their last value).
inline double sup_distance(const ChainConfig& u, const ChainConfig& v) {
  const Window w = union_window(u, v);
  double d = std::max(std::abs(u.left_tail() - v.left_tail()), std::abs(u.right_tail() - v.right_tail()));
  for (int i = w.lo; i <= w.hi; ++i) d = std::max(d, std::abs(u(i) - v(i)));
  return d;
}

/// min over integer shifts |k| <= max_shift of sup_distance(shift(u, k), v).
inline double aligned_distance(const ChainConfig& u, const ChainConfig& v, int max_shift) {
  double best = sup_distance(u, v);
  for (int k = -max_shift; k <= max_shift; ++k) best = std::min(best, sup_distance(shift(u, k), v));
  return best;
}

}  // namespace fkmt
