#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dpfed/coeff_tree.hpp"

namespace dpfed {

enum class FamilyName { haar, daubechies2, daubechies3, daubechies4 };
enum class BoundaryMode { exact_haar, periodized };
/// Father (scaling) functions live only at the base level; mothers at every level.
enum class BasisKind { father, mother };

FamilyName parse_family_name(std::string_view name);
std::string to_string(FamilyName name);

struct LevelIndex {
  int l = 0;
  std::int64_t k = 0;
  friend bool operator==(const LevelIndex&, const LevelIndex&) = default;
};

/// Basis functions of one level that do not vanish at a point, with their
/// values.  Capacity covers the largest overlap constant (2A-1 = 7).
struct SupportSet {
  static constexpr int kCapacity = 8;
  std::array<std::int64_t, kCapacity> k{};
  std::array<double, kCapacity> value{};
  int size = 0;

  void push(std::int64_t idx, double v) {
    k[static_cast<std::size_t>(size)] = idx;
    value[static_cast<std::size_t>(size)] = v;
    ++size;
  }
};

/// Compactly supported orthonormal wavelet basis of L2[0,1]: exact Haar, or
/// periodized Daubechies with A vanishing moments evaluated from a cascade
/// table.  Immutable; copies share the tables.
class WaveletFamily {
 public:
  static constexpr int kMinCascadeDepth = 8;
  static constexpr int kMaxCascadeDepth = 20;
  static constexpr int kDefaultCascadeDepth = 12;
  /// Highest level any tree or plan may use with this family.
  static constexpr int kMaxLevel = 24;

  static WaveletFamily build(FamilyName name, int cascade_depth = kDefaultCascadeDepth);

  FamilyName name() const { return name_; }
  int vanishing_moments() const { return vanishing_moments_; }
  /// Length of the support of the mother and father wavelet on the real line.
  int support_length() const { return support_length_; }
  /// max(||phi||_inf, ||psi||_inf) over the tabulated values.
  double sup_norm() const { return sup_norm_; }
  /// Maximal number of basis functions per level not vanishing at a point.
  int overlap_constant() const { return overlap_constant_; }
  int base_level() const { return base_level_; }
  BoundaryMode boundary_mode() const { return boundary_; }
  int cascade_depth() const { return cascade_depth_; }
  int max_level() const { return kMaxLevel; }
  /// Low-pass filter h (sum sqrt 2, unit norm).
  const std::vector<double>& filter() const;

  /// psi_{lk}(x) = 2^{l/2} psi(2^l x - k) (periodized for Daubechies).
  double eval_psi(LevelIndex idx, double x) const;
  /// phi_{lk}(x) = 2^{l/2} phi(2^l x - k).
  double eval_phi(LevelIndex idx, double x) const;
  double eval(BasisKind kind, LevelIndex idx, double x) const;

  /// Unscaled mother/father on the real line (zero outside [0, support_length]).
  double mother(double t) const;
  double father(double t) const;

  SupportSet support_at(BasisKind kind, int l, double x) const;
  std::vector<LevelIndex> supported_indices(int l, double x,
                                            BasisKind kind = BasisKind::mother) const;

  /// sum over father and detail coefficients of f_{lk} psi_{lk}(x).
  double synthesize(const CoeffTree& tree, double x) const;

 private:
  struct Tables;
  WaveletFamily() = default;
  void check_level(int l) const;
  double table_lookup(const std::vector<double>& table, double t) const;

  FamilyName name_ = FamilyName::haar;
  int vanishing_moments_ = 1;
  int support_length_ = 1;
  double sup_norm_ = 1.0;
  int overlap_constant_ = 1;
  int base_level_ = 0;
  BoundaryMode boundary_ = BoundaryMode::exact_haar;
  int cascade_depth_ = 0;
  std::shared_ptr<const Tables> tables_;
};

}  // namespace dpfed
