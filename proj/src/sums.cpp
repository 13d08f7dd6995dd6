#include "qfclt/sums.hpp"

#include <algorithm>
#include <cmath>

#include "qfclt/error.hpp"
#include "qfclt/parallel.hpp"
#include "qfclt/stats.hpp"

namespace qfclt {

namespace {

// Row-major box, last coordinate fastest.
struct Shape {
  int d = 0;
  std::array<std::size_t, kMaxDim> ext{}, stride{};
  std::size_t size = 1;

  explicit Shape(int dim, const std::array<std::size_t, kMaxDim>& e) : d(dim), ext(e) {
    for (int k = d - 1; k >= 0; --k) {
      stride[static_cast<std::size_t>(k)] = size;
      size *= ext[static_cast<std::size_t>(k)];
    }
  }
};

// B[p] = sum_{t=0}^{min(p, |g|-1)} g[t] A[p - t] along one axis.
void convolve_axis(const Shape& s, int axis, const std::vector<double>& g, const std::vector<double>& in,
                   std::vector<double>& out) {
  const auto ax = static_cast<std::size_t>(axis);
  const std::size_t len = s.ext[ax], inner = s.stride[ax], outer = s.size / (len * inner);
  const std::size_t taps = g.size();
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t base = o * len * inner;
    for (std::size_t p = 0; p < len; ++p) {
      double* dst = &out[base + p * inner];
      std::fill(dst, dst + inner, 0.0);
      const std::size_t tmax = std::min(p + 1, taps);
      for (std::size_t t = 0; t < tmax; ++t) {
        const double c = g[t];
        if (c == 0.0) continue;
        const double* src = &in[base + (p - t) * inner];
        for (std::size_t i = 0; i < inner; ++i) dst[i] += c * src[i];
      }
    }
  }
}

std::vector<double> separable(const Shape& s, const std::vector<double>& g, std::vector<double> a) {
  std::vector<double> tmp(a.size());
  for (int ax = 0; ax < s.d; ++ax) {
    convolve_axis(s, ax, g, a, tmp);
    a.swap(tmp);
  }
  return a;
}

// Field values X_k for k in [1,n] from the innovation patch over [1-R, n].
std::vector<double> field_on_box(const FieldModel& model, const Shape& patch, const Shape& box, int radius,
                                 const std::vector<double>& xi) {
  const int d = box.d;
  const auto R = static_cast<std::size_t>(radius);
  std::vector<double> out(box.size, 0.0);

  auto gather = [&](const std::vector<double>& full) {
    // full is indexed by patch position p = k + R - 1.
    std::array<std::size_t, kMaxDim> k{};
    for (std::size_t flat = 0; flat < box.size; ++flat) {
      std::size_t rem = flat, pf = 0;
      for (int i = 0; i < d; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        k[ii] = rem / box.stride[ii];
        rem %= box.stride[ii];
        pf += (k[ii] + R) * patch.stride[ii];
      }
      out[flat] = full[pf];
    }
  };
  auto patch_pos = [&](std::size_t flat_box, const MultiIndex& lag) {
    std::size_t rem = flat_box, pf = 0;
    for (int i = 0; i < d; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const std::size_t k = rem / box.stride[ii];
      rem %= box.stride[ii];
      pf += (k + R - static_cast<std::size_t>(lag[i])) * patch.stride[ii];
    }
    return pf;
  };

  if (model.kind() == ModelKind::IidDiff) {
    gather(xi);
    return out;
  }
  if (auto* l = model.as_linear()) {
    if (l->family.product_form()) {
      std::vector<double> g(R + 1);
      for (std::size_t t = 0; t <= R; ++t) g[t] = l->family.factor(static_cast<std::int64_t>(t));
      gather(separable(patch, g, xi));
    } else {
      for (std::size_t f = 0; f < box.size; ++f) {
        double s = 0.0;
        for (const auto& t : l->terms) s += t.a * xi[patch_pos(f, t.lag)];
        out[f] = s;
      }
    }
    return out;
  }
  const auto* v = model.as_volterra();
  if (v->family.product_form()) {
    // sum_{u != v} b_u b_v x_u x_v = (sum b_u x_u)^2 - sum b_u^2 x_u^2
    std::vector<double> g(R + 1), g2(R + 1);
    for (std::size_t t = 0; t <= R; ++t) {
      g[t] = v->family.factor(static_cast<std::int64_t>(t));
      g2[t] = g[t] * g[t];
    }
    std::vector<double> sq(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) sq[i] = xi[i] * xi[i];
    const auto y = separable(patch, g, xi);
    const auto z = separable(patch, g2, std::move(sq));
    std::vector<double> full(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) full[i] = y[i] * y[i] - z[i];
    gather(full);
  } else {
    for (std::size_t f = 0; f < box.size; ++f) {
      double s = 0.0;
      for (const auto& t : v->terms) s += t.a * xi[patch_pos(f, t.u)] * xi[patch_pos(f, t.v)];
      out[f] = s;
    }
  }
  return out;
}

}  // namespace

std::string to_string(PathMode mode) { return mode == PathMode::Cubic ? "cubic" : "rectangular"; }

PathMode path_mode_from_string(const std::string& s) {
  if (s == "cubic") return PathMode::Cubic;
  if (s == "rectangular") return PathMode::Rectangular;
  throw Error(Errc::invalid_config, "mode must be 'cubic' or 'rectangular', got '" + s + "'");
}

Grid Grid::product(int d, const std::vector<double>& levels) {
  if (d < 1 || d > kMaxDim) throw Error(Errc::domain_error, "grid dimension must be in 1..4");
  Grid g;
  g.d = d;
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= levels.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    GridPoint p{};
    std::size_t rem = flat;
    for (int k = d - 1; k >= 0; --k) {
      p[static_cast<std::size_t>(k)] = levels[rem % levels.size()];
      rem /= levels.size();
    }
    g.points.push_back(p);
  }
  g.validate();
  return g;
}

Grid Grid::standard(int d) { return product(d, {0.25, 0.5, 0.75, 1.0}); }

void Grid::validate() const {
  if (d < 1 || d > kMaxDim) throw Error(Errc::domain_error, "grid dimension must be in 1..4");
  for (const auto& p : points)
    for (int k = 0; k < d; ++k) {
      const double t = p[static_cast<std::size_t>(k)];
      if (!(t >= 0.0 && t <= 1.0)) throw Error(Errc::domain_error, "grid point outside [0,1]^d");
    }
}

MultiIndex scaled_index(const Rect& n, const GridPoint& t) {
  MultiIndex m(n.dim());
  for (int k = 0; k < n.dim(); ++k)
    m[k] = static_cast<std::int64_t>(std::floor(static_cast<double>(n.upper()[k]) * t[static_cast<std::size_t>(k)] + 1e-9));
  return m;
}

CornerSums::CornerSums(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx, const Rect& n,
                       std::vector<CornerMask> masks)
    : n_(n) {
  const int d = model.dim();
  if (n.dim() != d) throw Error(Errc::domain_error, "rectangle dimension mismatch");
  if (masks.empty()) masks = all_masks(d);
  const int R = model.radius();

  std::array<std::size_t, kMaxDim> pe{}, be{}, qe{};
  for (int k = 0; k < d; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    be[kk] = static_cast<std::size_t>(n.upper()[k]);
    pe[kk] = be[kk] + static_cast<std::size_t>(R);
    qe[kk] = be[kk] + 1;
  }
  const Shape patch(d, pe), box(d, be), pref(d, qe);

  std::vector<double> xi(patch.size);
  std::vector<std::uint8_t> positive(patch.size);  // bit k: coordinate k of w is > 0
  {
    MultiIndex w(d);
    for (std::size_t flat = 0; flat < patch.size; ++flat) {
      std::size_t rem = flat;
      std::uint8_t bits = 0;
      for (int i = 0; i < d; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const auto p = static_cast<std::int64_t>(rem / patch.stride[ii]);
        rem %= patch.stride[ii];
        w[i] = p + 1 - R;
        if (w[i] > 0) bits |= static_cast<std::uint8_t>(1u << i);
      }
      positive[flat] = bits;
      xi[flat] = innovation_at(spec, ctx, w);
    }
  }

  masks_.assign(std::size_t{1} << d, -1);
  for (auto mask : masks) {
    if (mask.bits() >= (1u << d)) throw Error(Errc::invalid_mask, "mask names a coordinate beyond d");
    if (masks_[mask.bits()] >= 0) continue;
    std::vector<double> masked = xi;
    if (!mask.empty())
      for (std::size_t f = 0; f < masked.size(); ++f)
        if (positive[f] & mask.bits()) masked[f] = 0.0;
    const auto field = field_on_box(model, patch, box, R, masked);

    std::vector<double> p(pref.size, 0.0);
    for (std::size_t f = 0; f < box.size; ++f) {
      std::size_t rem = f, q = 0;
      for (int i = 0; i < d; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        q += (rem / box.stride[ii] + 1) * pref.stride[ii];
        rem %= box.stride[ii];
      }
      p[q] = field[f];
    }
    for (int ax = 0; ax < d; ++ax) {
      const auto a = static_cast<std::size_t>(ax);
      const std::size_t len = pref.ext[a], inner = pref.stride[a], outer = pref.size / (len * inner);
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t q = 1; q < len; ++q) {
          double* dst = &p[(o * len + q) * inner];
          const double* src = &p[(o * len + q - 1) * inner];
          for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
        }
    }
    masks_[mask.bits()] = static_cast<std::int64_t>(prefix_.size());
    prefix_.push_back(std::move(p));
  }
}

std::size_t CornerSums::offset(const MultiIndex& m) const {
  std::size_t off = 0;
  for (int k = 0; k < n_.dim(); ++k) {
    if (m[k] < 0 || m[k] > n_.upper()[k]) throw Error(Errc::domain_error, "index outside [0, n]");
    off = off * static_cast<std::size_t>(n_.upper()[k] + 1) + static_cast<std::size_t>(m[k]);
  }
  return off;
}

double CornerSums::corner_sum(const MultiIndex& m, CornerMask mask) const {
  if (mask.bits() >= masks_.size() || masks_[mask.bits()] < 0)
    throw Error(Errc::invalid_mask, "mask was not computed");
  return prefix_[static_cast<std::size_t>(masks_[mask.bits()])][offset(m)];
}

double CornerSums::centered(const MultiIndex& m) const {
  double s = 0.0;
  for (auto mask : all_masks(n_.dim())) {
    const double v = corner_sum(m, mask);
    s += mask.size() % 2 == 0 ? v : -v;
  }
  return s;
}

double partial_sum(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx, const Rect& n) {
  if (n.volume() > 10000) {
    CompensatedSum s;
    for (const auto& k : rect_iter(n)) s.add(field_eval(model, spec, ctx, k));
    return s.value();
  }
  double s = 0.0;
  for (const auto& k : rect_iter(n)) s += field_eval(model, spec, ctx, k);
  return s;
}

double random_centering(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx,
                        const Rect& n) {
  double r = 0.0;
  for (auto mask : all_masks(n.dim())) {
    if (mask.empty()) continue;
    const double e = cond_expect_sum(model, spec, ctx, n, corner(n.upper(), mask));
    r += mask.size() % 2 == 1 ? e : -e;
  }
  return r;
}

PathSample centered_path(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx,
                         const Rect& n, const Grid& grid, PathMode mode) {
  grid.validate();
  if (grid.d != n.dim()) throw Error(Errc::domain_error, "grid dimension mismatch");
  if (mode == PathMode::Cubic && !n.is_square()) throw Error(Errc::domain_error, "cubic mode needs a square n");
  PathSample out;
  out.grid = grid;
  out.n = n;
  out.trial_seed = ctx.trial_seed;
  out.normalization = mode == PathMode::Cubic
                          ? std::pow(static_cast<double>(n.upper()[0]), 0.5 * n.dim())
                          : std::sqrt(static_cast<double>(n.volume()));
  const CornerSums sums(model, spec, ctx, n);
  out.terminal = sums.centered(n.upper()) / out.normalization;
  out.terminal_uncentered = sums.partial(n.upper()) / out.normalization;
  out.values.reserve(grid.size());
  out.uncentered.reserve(grid.size());
  for (const auto& t : grid.points) {
    const MultiIndex m = scaled_index(n, t);
    out.values.push_back(sums.centered(m) / out.normalization);
    out.uncentered.push_back(sums.partial(m) / out.normalization);
  }
  return out;
}

std::uint64_t trial_seed_for(std::uint64_t omega_seed, std::uint64_t n_index, std::uint64_t trial) {
  return derive_seed(omega_seed, n_index, trial);
}

namespace {

MeanEstimate summarize(const std::vector<double>& v) {
  MeanEstimate e;
  e.trials = v.size();
  e.value = mean(v);
  e.std_error = std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
  return e;
}

std::vector<std::int64_t> dyadic_levels(std::int64_t n) {
  std::vector<std::int64_t> out;
  for (std::int64_t m = 1; m < n; m *= 2) out.push_back(m);
  out.push_back(n);
  return out;
}

}  // namespace

NegligibilityEstimate centering_negligibility(const FieldModel& model, const InnovationSpec& spec,
                                              std::uint64_t omega_seed, int coordinate, const Rect& n,
                                              int trials, std::uint64_t master_salt) {
  const int d = model.dim();
  if (trials < 100) throw Error(Errc::domain_error, "centering_negligibility needs at least 100 trials");
  if (coordinate < 1 || coordinate > d) throw Error(Errc::domain_error, "coordinate must be in 1..d");
  if (n.dim() != d) throw Error(Errc::domain_error, "rectangle dimension mismatch");
  NegligibilityEstimate rep;
  rep.n = n;
  rep.coordinate = coordinate;
  rep.dyadic_sublattice = n.volume() > 10000;

  std::vector<MultiIndex> ms;
  if (rep.dyadic_sublattice) {
    std::vector<std::vector<std::int64_t>> lv;
    for (int k = 0; k < d; ++k) lv.push_back(dyadic_levels(n.upper()[k]));
    MultiIndex lo(d), hi(d);
    for (int k = 0; k < d; ++k) hi[k] = static_cast<std::int64_t>(lv[static_cast<std::size_t>(k)].size()) - 1;
    for_each_in_box(lo, hi, [&](const MultiIndex& idx) {
      MultiIndex m(d);
      for (int k = 0; k < d; ++k) m[k] = lv[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx[k])];
      ms.push_back(m);
    });
  } else {
    ms = rect_iter(n);
  }

  const CornerMask mask(1u << (coordinate - 1));
  const double vol = static_cast<double>(n.volume());
  std::vector<double> vals(static_cast<std::size_t>(trials));
  parallel_for(vals.size(), [&](std::size_t t) {
    const SeedContext ctx{omega_seed, trial_seed_for(omega_seed, 0x6e65676cULL + static_cast<std::uint64_t>(coordinate), t),
                          master_salt};
    const CornerSums sums(model, spec, ctx, n, {mask});
    double best = 0.0;
    for (const auto& m : ms) best = std::max(best, std::pow(sums.corner_sum(m, mask), 2));
    vals[t] = best / vol;
  });
  rep.estimate = summarize(vals);
  return rep;
}

std::vector<NegligibilityEstimate> negligibility_sweep(const FieldModel& model, const InnovationSpec& spec,
                                                       std::uint64_t omega_seed, int coordinate,
                                                       const std::vector<Rect>& n_list, int trials,
                                                       std::uint64_t master_salt) {
  std::vector<NegligibilityEstimate> out;
  out.reserve(n_list.size());
  for (const auto& n : n_list)
    out.push_back(centering_negligibility(model, spec, omega_seed, coordinate, n, trials, master_salt));
  return out;
}

MeanEstimate variance_ratio(const FieldModel& model, const InnovationSpec& spec,
                            const std::vector<std::uint64_t>& omega_seeds, const Rect& n, int trials,
                            std::uint64_t n_index, std::uint64_t master_salt) {
  if (omega_seeds.empty() || trials < 1) throw Error(Errc::empty_input, "variance_ratio needs seeds and trials");
  const auto per = static_cast<std::size_t>(trials);
  std::vector<double> vals(omega_seeds.size() * per);
  const double vol = static_cast<double>(n.volume());
  parallel_for(vals.size(), [&](std::size_t i) {
    const auto omega = omega_seeds[i / per];
    const SeedContext ctx{omega, trial_seed_for(omega, n_index, i % per), master_salt};
    const CornerSums sums(model, spec, ctx, n);
    const double s = sums.centered(n.upper());
    vals[i] = s * s / vol;
  });
  return summarize(vals);
}

}  // namespace qfclt
