#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dpfed {

/// Wavelet coefficients of a function on [0,1]: the 2^l0 father (scaling)
/// coefficients at the base level l0 followed by the detail coefficients of
/// levels l0..top_level, 2^l entries each.
///
/// Flattened layout: father k sits at index k, detail (l,k) at index 2^l + k,
/// so a tree truncated at resolution J (top_level = J-1) has exactly 2^J
/// entries and spans the space V_J.
class CoeffTree {
 public:
  /// Zero tree holding no coefficients.
  CoeffTree() = default;
  /// Zero tree with father level l0 and details up to `top_level`
  /// (top_level = l0 - 1 means father only).
  CoeffTree(int l0, int top_level);

  /// Inverse of flatten().  `values.size()` must be a power of two >= 2^l0.
  static CoeffTree from_flat(int l0, std::span<const double> values);

  int l0() const { return l0_; }
  int top_level() const { return l0_ + static_cast<int>(details_.size()) - 1; }
  /// J such that the tree spans V_J.
  int resolution() const { return top_level() + 1; }
  bool has_coefficients() const { return !father_.empty(); }

  std::span<const double> father() const { return father_; }
  std::span<double> father() { return father_; }
  /// Detail coefficients of level l, l0 <= l <= top_level.
  std::span<const double> level(int l) const;
  std::span<double> level(int l);

  std::size_t size() const;
  std::vector<double> flatten() const;

  /// Sum of squares of all stored coefficients (= squared L2 norm).
  double squared_norm() const;
  /// Sum of squared detail coefficients at levels >= `from_level`.
  double detail_energy_from(int from_level) const;

  CoeffTree scaled(double t) const;
  /// Copy keeping details up to `top_level` (missing levels are zero-filled).
  CoeffTree truncated(int top_level) const;

  friend bool operator==(const CoeffTree&, const CoeffTree&) = default;

 private:
  int l0_ = 0;
  std::vector<double> father_;
  std::vector<std::vector<double>> details_;
};

}  // namespace dpfed
