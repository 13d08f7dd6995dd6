#include "qfclt/lattice.hpp"

#include <algorithm>
#include <bit>

#include "qfclt/error.hpp"

namespace qfclt {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw Error(Errc::domain_error, "dimension must be in [1," + std::to_string(kMaxDim) + "], got " +
                                        std::to_string(dim));
}

void check_same_dim(const MultiIndex& a, const MultiIndex& b) {
  if (a.dim() != b.dim()) throw Error(Errc::domain_error, "dimension mismatch " + a.str() + " vs " + b.str());
}

}  // namespace

MultiIndex::MultiIndex(int dim, std::int64_t fill) : dim_(dim) {
  check_dim(dim);
  std::fill_n(c_.begin(), dim, fill);
}

MultiIndex::MultiIndex(std::initializer_list<std::int64_t> coords)
    : MultiIndex(from(std::span<const std::int64_t>(coords.begin(), coords.size()))) {}

MultiIndex MultiIndex::from(std::span<const std::int64_t> coords) {
  MultiIndex m(static_cast<int>(coords.size()));
  std::copy(coords.begin(), coords.end(), m.c_.begin());
  return m;
}

MultiIndex& MultiIndex::operator+=(const MultiIndex& o) {
  check_same_dim(*this, o);
  for (int k = 0; k < dim_; ++k) (*this)[k] += o[k];
  return *this;
}

MultiIndex& MultiIndex::operator-=(const MultiIndex& o) {
  check_same_dim(*this, o);
  for (int k = 0; k < dim_; ++k) (*this)[k] -= o[k];
  return *this;
}

std::string MultiIndex::str() const {
  std::string s = "(";
  for (int k = 0; k < dim_; ++k) {
    if (k) s += ",";
    s += std::to_string((*this)[k]);
  }
  return s + ")";
}

bool precedes(const MultiIndex& u, const MultiIndex& v) {
  check_same_dim(u, v);
  for (int k = 0; k < u.dim(); ++k)
    if (u[k] > v[k]) return false;
  return true;
}

MultiIndex meet(const MultiIndex& u, const MultiIndex& v) {
  check_same_dim(u, v);
  MultiIndex r = u;
  for (int k = 0; k < u.dim(); ++k) r[k] = std::min(u[k], v[k]);
  return r;
}

MultiIndex join(const MultiIndex& u, const MultiIndex& v) {
  check_same_dim(u, v);
  MultiIndex r = u;
  for (int k = 0; k < u.dim(); ++k) r[k] = std::max(u[k], v[k]);
  return r;
}

MultiIndex unit(int dim, int k) {
  MultiIndex e(dim);
  e[k] = 1;
  return e;
}

std::int64_t volume(const MultiIndex& n) {
  std::int64_t v = 1;
  for (auto c : n.coords()) v *= c;
  return v;
}

Rect::Rect(MultiIndex upper) : upper_(upper) {
  for (auto c : upper_.coords())
    if (c < 1) throw Error(Errc::domain_error, "rectangle upper corner must be >= 1, got " + upper_.str());
  if (upper_.dim() == 0) throw Error(Errc::domain_error, "rectangle needs a dimension");
}

bool Rect::is_square() const {
  auto c = upper_.coords();
  return std::all_of(c.begin(), c.end(), [&](auto x) { return x == c.front(); });
}

CornerMask CornerMask::of(std::initializer_list<int> coords) {
  unsigned bits = 0;
  for (int c : coords) {
    if (c < 1 || c > 31) throw Error(Errc::invalid_mask, "coordinate " + std::to_string(c) + " out of range");
    bits |= 1u << (c - 1);
  }
  return CornerMask(bits);
}

int CornerMask::size() const noexcept { return std::popcount(bits_); }

std::vector<CornerMask> all_masks(int d) {
  check_dim(d);
  std::vector<CornerMask> out;
  out.reserve(std::size_t{1} << d);
  for (unsigned b = 0; b < (1u << d); ++b) out.emplace_back(b);
  return out;
}

MultiIndex corner(const MultiIndex& n, CornerMask mask) {
  if (mask.bits() >> n.dim())
    throw Error(Errc::invalid_mask, "mask references a coordinate beyond d=" + std::to_string(n.dim()));
  MultiIndex c = n;
  for (int k = 0; k < n.dim(); ++k)
    if (mask.contains(k)) c[k] = 0;
  return c;
}

void for_each_in_box(const MultiIndex& lo, const MultiIndex& hi,
                     const std::function<void(const MultiIndex&)>& fn) {
  check_same_dim(lo, hi);
  const int d = lo.dim();
  for (int k = 0; k < d; ++k)
    if (lo[k] > hi[k]) return;
  MultiIndex i = lo;
  while (true) {
    fn(i);
    int k = d - 1;
    while (k >= 0 && i[k] == hi[k]) {
      i[k] = lo[k];
      --k;
    }
    if (k < 0) return;
    ++i[k];
  }
}

std::vector<MultiIndex> rect_iter(const Rect& n) {
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(n.volume()));
  for_each_in_box(MultiIndex(n.dim(), 1), n.upper(), [&](const MultiIndex& i) { out.push_back(i); });
  return out;
}

}  // namespace qfclt
