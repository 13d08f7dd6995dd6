#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace qfclt {

inline constexpr int kMaxDim = 4;

/// A point of Z^d, 1 <= d <= kMaxDim. Unused trailing slots are kept at zero
/// so that the defaulted comparisons are well defined.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(int dim, std::int64_t fill = 0);
  MultiIndex(std::initializer_list<std::int64_t> coords);
  static MultiIndex from(std::span<const std::int64_t> coords);

  int dim() const noexcept { return dim_; }
  std::int64_t operator[](int k) const noexcept { return c_[static_cast<std::size_t>(k)]; }
  std::int64_t& operator[](int k) noexcept { return c_[static_cast<std::size_t>(k)]; }
  std::span<const std::int64_t> coords() const noexcept {
    return {c_.data(), static_cast<std::size_t>(dim_)};
  }

  // Lexicographic total order (first coordinate most significant); used for
  // containers only. The lattice partial order is precedes().
  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

  MultiIndex& operator+=(const MultiIndex& o);
  MultiIndex& operator-=(const MultiIndex& o);
  friend MultiIndex operator+(MultiIndex a, const MultiIndex& b) { return a += b; }
  friend MultiIndex operator-(MultiIndex a, const MultiIndex& b) { return a -= b; }

  std::string str() const;

 private:
  int dim_ = 0;
  std::array<std::int64_t, kMaxDim> c_{};
};

/// u <= v coordinate-wise.
bool precedes(const MultiIndex& u, const MultiIndex& v);
/// Coordinate-wise minimum / maximum.
MultiIndex meet(const MultiIndex& u, const MultiIndex& v);
MultiIndex join(const MultiIndex& u, const MultiIndex& v);
/// Unit vector e_k, k zero-based.
MultiIndex unit(int dim, int k);

std::int64_t volume(const MultiIndex& n);

/// The region [1,n_1] x ... x [1,n_d].
class Rect {
 public:
  Rect() = default;
  explicit Rect(MultiIndex upper);  // throws domain_error unless all n_k >= 1

  const MultiIndex& upper() const noexcept { return upper_; }
  int dim() const noexcept { return upper_.dim(); }
  std::int64_t volume() const noexcept { return qfclt::volume(upper_); }
  bool is_square() const;

  bool operator==(const Rect&) const = default;

 private:
  MultiIndex upper_;
};

/// Subset of coordinates {1..d} replaced by zero. Bits are zero-based.
class CornerMask {
 public:
  constexpr CornerMask() = default;
  constexpr explicit CornerMask(unsigned bits) : bits_(bits) {}
  /// From one-based coordinate numbers, e.g. {1,3}.
  static CornerMask of(std::initializer_list<int> coords);

  constexpr unsigned bits() const noexcept { return bits_; }
  constexpr bool contains(int k) const noexcept { return (bits_ >> k) & 1u; }
  int size() const noexcept;
  bool empty() const noexcept { return bits_ == 0; }
  bool subset_of(CornerMask o) const noexcept { return (bits_ & ~o.bits_) == 0; }

 private:
  unsigned bits_ = 0;
};

/// All 2^d masks in increasing bit order (empty mask first).
std::vector<CornerMask> all_masks(int d);

/// n with the masked coordinates replaced by 0. Throws invalid_mask if the
/// mask names a coordinate beyond n.dim().
MultiIndex corner(const MultiIndex& n, CornerMask mask);

/// Every index of [1,n] in lexicographic order.
std::vector<MultiIndex> rect_iter(const Rect& n);

/// Visits every index of the box [lo, hi] (inclusive) in lexicographic order.
/// Does nothing if the box is empty.
void for_each_in_box(const MultiIndex& lo, const MultiIndex& hi,
                     const std::function<void(const MultiIndex&)>& fn);

}  // namespace qfclt
