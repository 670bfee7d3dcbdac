#include "dpfed/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace dpfed {

namespace {

// Daubechies low-pass filters with A = 2, 3, 4 vanishing moments.
const std::vector<double> kDb2 = {0.48296291314453414337, 0.83651630373780790558,
                                  0.22414386804201338103, -0.12940952255126038117};
const std::vector<double> kDb3 = {0.33267055295008261600, 0.80689150931109257649,
                                  0.45987750211849157010, -0.13501102001025458870,
                                  -0.08544127388202666169, 0.03522629188570953660};
const std::vector<double> kDb4 = {0.23037781330889650086, 0.71484657055291564709,
                                  0.63088076792985890788, -0.02798376941685985421,
                                  -0.18703481171909308408, 0.03084138183556076363,
                                  0.03288301166688519974, -0.01059740178506903211};
const std::vector<double> kHaar = {0.70710678118654752, 0.70710678118654752};

// Solves a small dense system in place by partial-pivot elimination.
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

// Values of the scaling function at the dyadic points i / 2^depth of its
// support [0, N-1].  Integer values come from the eigenvector of the
// two-scale relation for eigenvalue 1, normalized to sum 1; every further
// dyadic generation follows from phi(x) = sqrt2 sum_k h_k phi(2x - k).
std::vector<double> cascade_scaling(const std::vector<double>& h, int depth) {
  const int n = static_cast<int>(h.size());
  const int len = n - 1;
  std::vector<std::vector<double>> m(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const int j = 2 * i - k;
      if (j >= 0 && j < n) m[i][j] += std::sqrt(2.0) * h[k];
    }
    m[i][i] -= 1.0;
  }
  // The system is singular; replace its last row by the normalization.
  std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
  m[n - 1].assign(static_cast<std::size_t>(n), 1.0);
  rhs[n - 1] = 1.0;
  const std::vector<double> at_int = solve_dense(m, rhs);

  const std::int64_t scale = std::int64_t{1} << depth;
  std::vector<double> phi(static_cast<std::size_t>(len * scale + 1), 0.0);
  for (int i = 1; i < len; ++i) phi[static_cast<std::size_t>(i * scale)] = at_int[i];
  for (int gen = 1; gen <= depth; ++gen) {
    const std::int64_t step = std::int64_t{1} << (depth - gen);
    for (std::int64_t i = step; i < len * scale; i += 2 * step) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        const std::int64_t j = 2 * i - k * scale;
        if (j > 0 && j < len * scale) s += h[k] * phi[static_cast<std::size_t>(j)];
      }
      phi[static_cast<std::size_t>(i)] = std::sqrt(2.0) * s;
    }
  }
  return phi;
}

// psi(x) = sqrt2 sum_k g_k phi(2x - k), g_k = (-1)^k h_{N-1-k}, on the same grid.
std::vector<double> cascade_wavelet(const std::vector<double>& h, const std::vector<double>& phi,
                                    int depth) {
  const int n = static_cast<int>(h.size());
  const std::int64_t scale = std::int64_t{1} << depth;
  const std::int64_t last = static_cast<std::int64_t>(phi.size()) - 1;
  std::vector<double> psi(phi.size(), 0.0);
  for (std::int64_t i = 0; i <= last; ++i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double g = (k % 2 == 0 ? 1.0 : -1.0) * h[n - 1 - k];
      const std::int64_t j = 2 * i - k * scale;
      if (j >= 0 && j <= last) s += g * phi[static_cast<std::size_t>(j)];
    }
    psi[static_cast<std::size_t>(i)] = std::sqrt(2.0) * s;
  }
  return psi;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void check_point(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error(fmt::format("wavelet evaluation point {} outside [0,1]", x));
}

}  // namespace

struct WaveletFamily::Tables {
  std::vector<double> filter;
  std::vector<double> phi;
  std::vector<double> psi;
};

FamilyName parse_family_name(std::string_view name) {
  if (name == "haar") return FamilyName::haar;
  if (name == "daubechies-2") return FamilyName::daubechies2;
  if (name == "daubechies-3") return FamilyName::daubechies3;
  if (name == "daubechies-4") return FamilyName::daubechies4;
  throw std::invalid_argument(fmt::format("unknown wavelet family '{}'", name));
}

std::string to_string(FamilyName name) {
  switch (name) {
    case FamilyName::haar: return "haar";
    case FamilyName::daubechies2: return "daubechies-2";
    case FamilyName::daubechies3: return "daubechies-3";
    case FamilyName::daubechies4: return "daubechies-4";
  }
  return "?";
}

WaveletFamily WaveletFamily::build(FamilyName name, int cascade_depth) {
  if (cascade_depth < kMinCascadeDepth || cascade_depth > kMaxCascadeDepth)
    throw std::invalid_argument(fmt::format("cascade depth {} outside [{}, {}]", cascade_depth,
                                            kMinCascadeDepth, kMaxCascadeDepth));
  WaveletFamily fam;
  fam.name_ = name;
  fam.cascade_depth_ = cascade_depth;
  auto tables = std::make_shared<Tables>();
  if (name == FamilyName::haar) {
    tables->filter = kHaar;
    fam.vanishing_moments_ = 1;
    fam.support_length_ = 1;
    fam.sup_norm_ = 1.0;
    fam.overlap_constant_ = 1;
    fam.base_level_ = 0;
    fam.boundary_ = BoundaryMode::exact_haar;
  } else {
    const int a = name == FamilyName::daubechies2 ? 2 : name == FamilyName::daubechies3 ? 3 : 4;
    tables->filter = a == 2 ? kDb2 : a == 3 ? kDb3 : kDb4;
    tables->phi = cascade_scaling(tables->filter, cascade_depth);
    tables->psi = cascade_wavelet(tables->filter, tables->phi, cascade_depth);
    fam.vanishing_moments_ = a;
    fam.support_length_ = 2 * a - 1;
    fam.sup_norm_ = std::max(max_abs(tables->phi), max_abs(tables->psi));
    fam.overlap_constant_ = 2 * a - 1;
    // Smallest level at which one period holds a full support.
    fam.base_level_ = static_cast<int>(std::ceil(std::log2(2.0 * a - 1.0)));
    fam.boundary_ = BoundaryMode::periodized;
  }
  fam.tables_ = std::move(tables);
  return fam;
}

const std::vector<double>& WaveletFamily::filter() const { return tables_->filter; }

void WaveletFamily::check_level(int l) const {
  if (l < base_level_ || l > kMaxLevel)
    throw std::invalid_argument(
        fmt::format("level {} outside [{}, {}] for {}", l, base_level_, kMaxLevel, to_string(name_)));
}

double WaveletFamily::table_lookup(const std::vector<double>& table, double t) const {
  if (!(t > 0.0) || t >= support_length_) return 0.0;
  const double y = std::ldexp(t, cascade_depth_);
  const auto i = static_cast<std::size_t>(y);
  if (i + 1 >= table.size()) return table.back();
  const double frac = y - static_cast<double>(i);
  return table[i] + frac * (table[i + 1] - table[i]);
}

double WaveletFamily::mother(double t) const {
  if (boundary_ == BoundaryMode::exact_haar) {
    if (t < 0.0 || t > 1.0) return 0.0;
    return t < 0.5 ? 1.0 : -1.0;
  }
  return table_lookup(tables_->psi, t);
}

double WaveletFamily::father(double t) const {
  if (boundary_ == BoundaryMode::exact_haar) return (t >= 0.0 && t <= 1.0) ? 1.0 : 0.0;
  return table_lookup(tables_->phi, t);
}

SupportSet WaveletFamily::support_at(BasisKind kind, int l, double x) const {
  check_point(x);
  check_level(l);
  SupportSet out;
  const std::int64_t period = std::int64_t{1} << l;
  const double amp = std::ldexp(1.0, l / 2) * ((l % 2) ? std::numbers::sqrt2 : 1.0);
  const double y = std::ldexp(x, l);
  if (boundary_ == BoundaryMode::exact_haar) {
    // x = 1 belongs to the last cell.
    const std::int64_t k = std::min(static_cast<std::int64_t>(y), period - 1);
    const double t = y - static_cast<double>(k);
    const double v = kind == BasisKind::father ? 1.0 : (t < 0.5 ? 1.0 : -1.0);
    out.push(k, amp * v);
    return out;
  }
  const auto base = static_cast<std::int64_t>(std::floor(y));
  const double frac = y - static_cast<double>(base);
  for (int j = 0; j < support_length_; ++j) {
    const double t = frac + j;
    const double v = kind == BasisKind::father ? father(t) : mother(t);
    if (v == 0.0) continue;
    std::int64_t k = (base - j) % period;
    if (k < 0) k += period;
    out.push(k, amp * v);
  }
  return out;
}

double WaveletFamily::eval(BasisKind kind, LevelIndex idx, double x) const {
  check_point(x);
  check_level(idx.l);
  const std::int64_t period = std::int64_t{1} << idx.l;
  if (idx.k < 0 || idx.k >= period)
    throw std::invalid_argument(fmt::format("translation {} outside [0, 2^{})", idx.k, idx.l));
  const SupportSet s = support_at(kind, idx.l, x);
  for (int i = 0; i < s.size; ++i)
    if (s.k[static_cast<std::size_t>(i)] == idx.k) return s.value[static_cast<std::size_t>(i)];
  return 0.0;
}

double WaveletFamily::eval_psi(LevelIndex idx, double x) const {
  return eval(BasisKind::mother, idx, x);
}

double WaveletFamily::eval_phi(LevelIndex idx, double x) const {
  return eval(BasisKind::father, idx, x);
}

std::vector<LevelIndex> WaveletFamily::supported_indices(int l, double x, BasisKind kind) const {
  const SupportSet s = support_at(kind, l, x);
  std::vector<LevelIndex> out;
  for (int i = 0; i < s.size; ++i) out.push_back({l, s.k[static_cast<std::size_t>(i)]});
  return out;
}

double WaveletFamily::synthesize(const CoeffTree& tree, double x) const {
  check_point(x);
  if (!tree.has_coefficients()) return 0.0;
  if (tree.l0() != base_level_)
    throw std::invalid_argument(fmt::format("tree base level {} does not match family base level {}",
                                            tree.l0(), base_level_));
  if (tree.top_level() > kMaxLevel) throw std::invalid_argument("tree deeper than family range");
  double sum = 0.0;
  const SupportSet fs = support_at(BasisKind::father, base_level_, x);
  const auto father = tree.father();
  for (int i = 0; i < fs.size; ++i)
    sum += father[static_cast<std::size_t>(fs.k[static_cast<std::size_t>(i)])] *
           fs.value[static_cast<std::size_t>(i)];
  for (int l = tree.l0(); l <= tree.top_level(); ++l) {
    const SupportSet s = support_at(BasisKind::mother, l, x);
    const auto coeffs = tree.level(l);
    for (int i = 0; i < s.size; ++i)
      sum += coeffs[static_cast<std::size_t>(s.k[static_cast<std::size_t>(i)])] *
             s.value[static_cast<std::size_t>(i)];
  }
  return sum;
}

}  // namespace dpfed
