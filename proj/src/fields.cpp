#include "qfclt/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "qfclt/error.hpp"

namespace qfclt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_family(const CoefficientFamily& f) {
  switch (f.kind) {
    case FamilyKind::Geometric:
      if (!(f.param > 0.0 && f.param < 1.0))
        throw Error(Errc::domain_error, "geometric ratio must lie in (0,1)");
      break;
    case FamilyKind::Polynomial:
      if (!(f.param > 0.0) || !std::isfinite(f.param))
        throw Error(Errc::domain_error, "polynomial exponent must be positive");
      break;
    default: break;
  }
}

void check_offset(const MultiIndex& j, int d, const char* what) {
  if (j.dim() != d) throw Error(Errc::domain_error, std::string(what) + " has the wrong dimension");
  for (auto c : j.coords())
    if (c < 0) throw Error(Errc::domain_error, std::string(what) + " must be >= 0");
}

int max_coord(const MultiIndex& j) {
  std::int64_t m = 0;
  for (auto c : j.coords()) m = std::max(m, c);
  return static_cast<int>(m);
}

double product_coef(const CoefficientFamily& f, const MultiIndex& j) {
  double a = 1.0;
  for (auto c : j.coords()) a *= f.factor(c);
  return a;
}

std::size_t dense_offset(const MultiIndex& j, int radius) {
  std::size_t off = 0;
  for (auto c : j.coords()) off = off * static_cast<std::size_t>(radius + 1) + static_cast<std::size_t>(c);
  return off;
}

void add_term(Chaos& out, const MultiIndex& a, const std::optional<MultiIndex>& b, double coef) {
  out.push_back({a, b, coef});
}

bool all_leq(const ChaosTerm& t, const MultiIndex& c) {
  return precedes(t.a, c) && (!t.b || precedes(*t.b, c));
}

}  // namespace

double CoefficientFamily::factor(std::int64_t t) const {
  if (t < 0) return 0.0;
  switch (kind) {
    case FamilyKind::Delta: return t == 0 ? 1.0 : 0.0;
    case FamilyKind::Geometric: return std::pow(param, static_cast<double>(t));
    case FamilyKind::Polynomial: return std::pow(1.0 + static_cast<double>(t), -param);
    case FamilyKind::Explicit: break;
  }
  throw Error(Errc::not_computable, "explicit coefficient lists have no product factor");
}

double CoefficientFamily::tail_pow(std::int64_t m, int p) const {
  m = std::max<std::int64_t>(m, 0);
  const double pp = static_cast<double>(p);
  switch (kind) {
    case FamilyKind::Delta: return m == 0 ? 1.0 : 0.0;
    case FamilyKind::Geometric: {
      const double rp = std::pow(param, pp);
      return std::pow(rp, static_cast<double>(m)) / (1.0 - rp);
    }
    case FamilyKind::Polynomial: {
      // sum_{x >= m+1} x^{-s}, direct head plus Euler-Maclaurin tail.
      const double s = param * pp;
      if (s <= 1.0) return kInf;
      const double first = static_cast<double>(m) + 1.0;
      const double big = first + 64.0;
      double head = 0.0;
      for (double x = first; x < big; x += 1.0) head += std::pow(x, -s);
      const double tail = std::pow(big, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(big, -s) +
                          s * std::pow(big, -s - 1.0) / 12.0 -
                          s * (s + 1.0) * (s + 2.0) * std::pow(big, -s - 3.0) / 720.0;
      return head + tail;
    }
    case FamilyKind::Explicit: break;
  }
  throw Error(Errc::not_computable, "explicit coefficient lists have no product tail");
}

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Delta: return "delta";
    case FamilyKind::Geometric: return "geometric";
    case FamilyKind::Polynomial: return "polynomial";
    case FamilyKind::Explicit: return "explicit";
  }
  return "?";
}

std::string CoefficientFamily::name() const {
  std::ostringstream os;
  os << to_string(kind);
  if (kind == FamilyKind::Geometric || kind == FamilyKind::Polynomial) os << "(" << param << ")";
  if (kind == FamilyKind::Explicit) os << "[" << terms.size() << "]";
  return os.str();
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Linear: return "linear";
    case ModelKind::Volterra: return "volterra";
    case ModelKind::IidDiff: return "iid_diff";
  }
  return "?";
}

double LinearModel::coef(const MultiIndex& j) const {
  for (auto c : j.coords())
    if (c < 0 || c > radius) return 0.0;
  return dense[dense_offset(j, radius)];
}

FieldModel FieldModel::linear(int d, CoefficientFamily family, int radius) {
  if (d < 1 || d > kMaxDim) throw Error(Errc::domain_error, "dimension must be in 1..4");
  validate_family(family);
  LinearModel m;
  m.d = d;
  if (family.kind == FamilyKind::Explicit) {
    int r = 1;
    for (const auto& [j, a] : family.terms) {
      check_offset(j, d, "linear lag");
      r = std::max(r, max_coord(j));
    }
    m.radius = std::max(r, radius);
  } else {
    if (radius < 1) throw Error(Errc::domain_error, "truncation radius must be >= 1");
    m.radius = radius;
  }
  m.family = std::move(family);
  std::size_t cells = 1;
  for (int k = 0; k < d; ++k) cells *= static_cast<std::size_t>(m.radius + 1);
  m.dense.assign(cells, 0.0);
  if (m.family.kind == FamilyKind::Explicit) {
    for (const auto& [j, a] : m.family.terms) m.dense[dense_offset(j, m.radius)] += a;
  } else {
    for_each_in_box(MultiIndex(d), MultiIndex(d, m.radius), [&](const MultiIndex& j) {
      m.dense[dense_offset(j, m.radius)] = product_coef(m.family, j);
    });
  }
  for_each_in_box(MultiIndex(d), MultiIndex(d, m.radius), [&](const MultiIndex& j) {
    const double a = m.dense[dense_offset(j, m.radius)];
    if (a != 0.0) m.terms.push_back({j, a});
  });
  FieldModel out;
  out.repr_ = std::move(m);
  return out;
}

FieldModel FieldModel::volterra(int d, CoefficientFamily family, int radius) {
  if (d < 1 || d > kMaxDim) throw Error(Errc::domain_error, "dimension must be in 1..4");
  validate_family(family);
  if (family.kind == FamilyKind::Explicit)
    throw Error(Errc::domain_error, "explicit Volterra coefficients are given as (u,v) pairs");
  if (radius < 1) throw Error(Errc::domain_error, "truncation radius must be >= 1");
  VolterraModel m;
  m.d = d;
  m.radius = radius;
  m.family = family;
  std::vector<std::pair<MultiIndex, double>> b;
  for_each_in_box(MultiIndex(d), MultiIndex(d, radius), [&](const MultiIndex& j) {
    const double v = product_coef(family, j);
    if (v != 0.0) b.emplace_back(j, v);
  });
  for (const auto& [u, bu] : b)
    for (const auto& [v, bv] : b)
      if (u != v) m.terms.push_back({u, v, bu * bv});
  FieldModel out;
  out.repr_ = std::move(m);
  return out;
}

FieldModel FieldModel::volterra_explicit(int d, std::vector<VolterraTerm> terms) {
  if (d < 1 || d > kMaxDim) throw Error(Errc::domain_error, "dimension must be in 1..4");
  VolterraModel m;
  m.d = d;
  m.radius = 1;
  m.family = CoefficientFamily::explicit_list({});
  for (const auto& t : terms) {
    check_offset(t.u, d, "Volterra lag u");
    check_offset(t.v, d, "Volterra lag v");
    if (t.u == t.v) throw Error(Errc::domain_error, "Volterra diagonal coefficient a_{u,u} must vanish");
    m.radius = std::max({m.radius, max_coord(t.u), max_coord(t.v)});
    if (t.a != 0.0) m.terms.push_back(t);
  }
  FieldModel out;
  out.repr_ = std::move(m);
  return out;
}

FieldModel FieldModel::iid_diff(int d) {
  if (d < 1 || d > kMaxDim) throw Error(Errc::domain_error, "dimension must be in 1..4");
  FieldModel out;
  out.repr_ = IidDiffModel{d};
  return out;
}

int FieldModel::dim() const noexcept {
  return std::visit([](const auto& m) { return m.d; }, repr_);
}

int FieldModel::radius() const noexcept {
  if (auto* l = as_linear()) return l->radius;
  if (auto* v = as_volterra()) return v->radius;
  return 0;
}

std::string FieldModel::name() const {
  if (auto* l = as_linear()) return "linear/" + l->family.name() + "/R" + std::to_string(l->radius);
  if (auto* v = as_volterra()) return "volterra/" + v->family.name() + "/R" + std::to_string(v->radius);
  return "iid_diff";
}

Chaos canonicalize(Chaos c) {
  std::map<std::pair<MultiIndex, MultiIndex>, double> first;
  std::map<std::pair<MultiIndex, MultiIndex>, double> second;
  for (auto& t : c) {
    if (!t.b) {
      first[{t.a, t.a}] += t.coef;
    } else {
      auto lo = std::min(t.a, *t.b), hi = std::max(t.a, *t.b);
      if (lo == hi) throw Error(Errc::domain_error, "chaos product term on a repeated index");
      second[{lo, hi}] += t.coef;
    }
  }
  Chaos out;
  for (const auto& [k, v] : first)
    if (v != 0.0) out.push_back({k.first, std::nullopt, v});
  for (const auto& [k, v] : second)
    if (v != 0.0) out.push_back({k.first, k.second, v});
  return out;
}

double chaos_eval(const Chaos& c, const InnovationSpec& spec, const SeedContext& ctx) {
  double s = 0.0;
  for (const auto& t : c) {
    double v = t.coef * innovation_at(spec, ctx, t.a);
    if (t.b) v *= innovation_at(spec, ctx, *t.b);
    s += v;
  }
  return s;
}

double chaos_l2_norm(const Chaos& c, const InnovationSpec& spec) {
  const double var = spec.variance();
  double s = 0.0;
  for (const auto& t : canonicalize(c)) s += t.coef * t.coef * (t.b ? var * var : var);
  return std::sqrt(s);
}

std::vector<double> chaos_samples(const Chaos& c, const InnovationSpec& spec, std::size_t count,
                                  std::uint64_t seed, bool decoupled) {
  const Chaos cc = canonicalize(c);
  std::map<MultiIndex, std::int64_t> slot;
  for (const auto& t : cc) {
    slot.emplace(t.a, 0);
    if (t.b) slot.emplace(*t.b, 0);
  }
  std::int64_t next = 1;
  for (auto& [k, v] : slot) v = next++;
  struct Compiled {
    std::int64_t a, b;
    double coef;
  };
  std::vector<Compiled> prog;
  prog.reserve(cc.size());
  for (const auto& t : cc) prog.push_back({slot[t.a], t.b ? slot[*t.b] : 0, t.coef});

  const SeedContext one{seed, seed, 0x636861'6f73ULL};
  const SeedContext two{seed, derive_seed(seed, 2), 0x636861'6f73ULL};
  std::vector<double> xi(static_cast<std::size_t>(next)), eta(static_cast<std::size_t>(next));
  std::vector<double> out(count);
  for (std::size_t s = 0; s < count; ++s) {
    const auto row = static_cast<std::int64_t>(s) + 1;
    for (std::int64_t k = 1; k < next; ++k) {
      xi[static_cast<std::size_t>(k)] = innovation_at(spec, one, MultiIndex{k, row});
      if (decoupled) eta[static_cast<std::size_t>(k)] = innovation_at(spec, two, MultiIndex{k, row});
    }
    double v = 0.0;
    for (const auto& p : prog) {
      const double x = xi[static_cast<std::size_t>(p.a)];
      if (p.b == 0) {
        v += p.coef * x;
      } else {
        v += p.coef * x * (decoupled ? eta : xi)[static_cast<std::size_t>(p.b)];
      }
    }
    out[s] = v;
  }
  return out;
}

Chaos field_chaos(const FieldModel& model, const MultiIndex& k) {
  if (k.dim() != model.dim()) throw Error(Errc::domain_error, "index dimension mismatch");
  Chaos out;
  if (auto* l = model.as_linear()) {
    out.reserve(l->terms.size());
    for (const auto& t : l->terms) add_term(out, k - t.lag, std::nullopt, t.a);
  } else if (auto* v = model.as_volterra()) {
    out.reserve(v->terms.size());
    for (const auto& t : v->terms) add_term(out, k - t.u, k - t.v, t.a);
  } else {
    add_term(out, k, std::nullopt, 1.0);
  }
  return out;
}

Chaos cond_expect_chaos(const FieldModel& model, const MultiIndex& k, const MultiIndex& c) {
  // Innovations are centered and independent: a first-order term survives iff
  // its index is F_c-measurable; a product of two distinct innovations
  // survives iff both are (one outside gives E[xi] = 0 times the other).
  Chaos all = field_chaos(model, k);
  Chaos out;
  for (auto& t : all)
    if (all_leq(t, c)) out.push_back(std::move(t));
  return out;
}

Chaos projection_chaos(const FieldModel& model, const MultiIndex& j, const MultiIndex& k) {
  if (j.dim() != model.dim() || k.dim() != model.dim())
    throw Error(Errc::domain_error, "index dimension mismatch");
  Chaos out;
  if (auto* l = model.as_linear()) {
    const double a = l->coef(k - j);
    if (a != 0.0) add_term(out, j, std::nullopt, a);
  } else if (auto* v = model.as_volterra()) {
    for (const auto& t : v->terms) {
      const MultiIndex x = k - t.u, y = k - t.v;
      if (join(x, y) == j) add_term(out, x, y, t.a);
    }
  } else if (j == k) {
    add_term(out, k, std::nullopt, 1.0);
  }
  return out;
}

double field_eval(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx,
                  const MultiIndex& k) {
  return chaos_eval(field_chaos(model, k), spec, ctx);
}

double cond_expect_field(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx,
                         const MultiIndex& k, const MultiIndex& c) {
  if (c.dim() != model.dim()) throw Error(Errc::domain_error, "conditioning index dimension mismatch");
  return chaos_eval(cond_expect_chaos(model, k, c), spec, ctx);
}

double cond_expect_sum(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx,
                       const Rect& n, const MultiIndex& c) {
  if (c.dim() != n.dim() || n.dim() != model.dim())
    throw Error(Errc::invalid_corner, "corner dimension mismatch");
  for (int k = 0; k < n.dim(); ++k)
    if (c[k] != 0 && c[k] != n.upper()[k])
      throw Error(Errc::invalid_corner, "corner " + c.str() + " is not a corner of " + n.upper().str());
  double s = 0.0, comp = 0.0;
  for (const auto& i : rect_iter(n)) {
    const double v = cond_expect_field(model, spec, ctx, i, c);
    const double t = s + v;
    comp += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  return s + comp;
}

double projection(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx,
                  const MultiIndex& j, const MultiIndex& k) {
  return chaos_eval(projection_chaos(model, j, k), spec, ctx);
}

double projection_oracle(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx,
                         const MultiIndex& j, const MultiIndex& k) {
  const int d = model.dim();
  // Term values are shared by the 2^d conditional expectations.
  const Chaos terms = field_chaos(model, k);
  std::vector<double> value(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) value[i] = chaos_eval({terms[i]}, spec, ctx);
  double s = 0.0;
  for (auto mask : all_masks(d)) {
    MultiIndex c = j;
    for (int i = 0; i < d; ++i)
      if (mask.contains(i)) c[i] -= 1;
    double e = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i)
      if (all_leq(terms[i], c)) e += value[i];
    s += (mask.size() % 2 == 0) ? e : -e;
  }
  return s;
}

SigmaReport sigma2_theoretical(const FieldModel& model, const InnovationSpec& spec) {
  spec.validate();
  const int d = model.dim();
  const double var = spec.variance();
  SigmaReport rep;
  std::ostringstream desc;
  if (auto* l = model.as_linear()) {
    double sum = 0.0;
    for (const auto& t : l->terms) sum += t.a;
    rep.d0 = {{MultiIndex(d), std::nullopt, sum}};
    rep.sigma2 = sum * sum * var;
    desc.precision(17);
    desc << "D_0 = (sum_j a_j) xi_0, sum_j a_j = " << sum;
    const auto& f = l->family;
    if (f.product_form()) {
      const double s1 = f.tail_pow(0, 1);
      if (std::isfinite(s1)) rep.sigma2_limit = std::pow(s1, 2.0 * d) * var;
    }
  } else if (auto* v = model.as_volterra()) {
    Chaos d0;
    d0.reserve(v->terms.size());
    for (const auto& t : v->terms) {
      const MultiIndex w = meet(t.u, t.v);  // the unique i with P_0 picking this term
      d0.push_back({w - t.u, w - t.v, t.a});
    }
    rep.d0 = canonicalize(std::move(d0));
    const double l2 = chaos_l2_norm(rep.d0, spec);
    rep.sigma2 = l2 * l2;
    desc << "D_0 = sum over pairs {a,b}, a != b, a v b = 0, of c_ab xi_a xi_b; " << rep.d0.size()
         << " distinct pairs, sigma^2 = sum c_ab^2 Var(xi)^2";
  } else {
    rep.d0 = {{MultiIndex(d), std::nullopt, 1.0}};
    rep.sigma2 = var;
    rep.sigma2_limit = var;
    desc << "D_0 = xi_0";
  }
  rep.d0_description = desc.str();
  return rep;
}

}  // namespace qfclt
