#include "dpfed/coeff_tree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace dpfed {

CoeffTree::CoeffTree(int l0, int top_level) : l0_(l0) {
  if (l0 < 0 || l0 > 30) throw std::invalid_argument("CoeffTree: base level out of range");
  if (top_level < l0 - 1 || top_level > 30)
    throw std::invalid_argument("CoeffTree: top level out of range");
  father_.assign(std::size_t{1} << l0, 0.0);
  for (int l = l0; l <= top_level; ++l) details_.emplace_back(std::size_t{1} << l, 0.0);
}

CoeffTree CoeffTree::from_flat(int l0, std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0 || !std::has_single_bit(n) || n < (std::size_t{1} << l0))
    throw std::invalid_argument("CoeffTree::from_flat: length must be a power of two >= 2^l0");
  const int resolution = std::countr_zero(n);
  CoeffTree tree(l0, resolution - 1);
  std::size_t i = 0;
  for (double& v : tree.father_) v = values[i++];
  for (auto& lvl : tree.details_)
    for (double& v : lvl) v = values[i++];
  return tree;
}

std::span<const double> CoeffTree::level(int l) const {
  if (l < l0_ || l > top_level()) throw std::out_of_range("CoeffTree::level");
  return details_[static_cast<std::size_t>(l - l0_)];
}

std::span<double> CoeffTree::level(int l) {
  if (l < l0_ || l > top_level()) throw std::out_of_range("CoeffTree::level");
  return details_[static_cast<std::size_t>(l - l0_)];
}

std::size_t CoeffTree::size() const {
  std::size_t n = father_.size();
  for (const auto& lvl : details_) n += lvl.size();
  return n;
}

std::vector<double> CoeffTree::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  out.insert(out.end(), father_.begin(), father_.end());
  for (const auto& lvl : details_) out.insert(out.end(), lvl.begin(), lvl.end());
  return out;
}

double CoeffTree::squared_norm() const {
  double s = 0.0;
  for (double v : father_) s += v * v;
  return s + detail_energy_from(l0_);
}

double CoeffTree::detail_energy_from(int from_level) const {
  double s = 0.0;
  for (int l = std::max(from_level, l0_); l <= top_level(); ++l)
    for (double v : details_[static_cast<std::size_t>(l - l0_)]) s += v * v;
  return s;
}

CoeffTree CoeffTree::scaled(double t) const {
  CoeffTree out = *this;
  for (double& v : out.father_) v *= t;
  for (auto& lvl : out.details_)
    for (double& v : lvl) v *= t;
  return out;
}

CoeffTree CoeffTree::truncated(int top_level) const {
  CoeffTree out(l0_, top_level);
  std::copy(father_.begin(), father_.end(), out.father_.begin());
  for (int l = l0_; l <= std::min(top_level, this->top_level()); ++l) {
    const auto& src = details_[static_cast<std::size_t>(l - l0_)];
    std::copy(src.begin(), src.end(), out.details_[static_cast<std::size_t>(l - l0_)].begin());
  }
  return out;
}

}  // namespace dpfed
