#include "qfclt/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "qfclt/error.hpp"
#include "qfclt/orlicz.hpp"
#include "qfclt/parallel.hpp"

namespace qfclt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
  double value = 0.0;
  double err = 0.0;
};

double vol(const MultiIndex& u) { return static_cast<double>(volume(u)); }

// Simpson quadrature of E[Phi(|xi|/t)] for a symmetric light-tailed law.
double expected_phi(const YoungFamily& fam, const InnovationSpec& spec, double t) {
  double upper = 0.0;
  std::function<double(double)> density;  // of |xi| on [0, upper]
  const double p = spec.param;
  switch (spec.dist) {
    case Distribution::Gaussian:
      upper = 14.0 * p;
      density = [p](double x) { return std::sqrt(2.0 / std::numbers::pi) / p * std::exp(-0.5 * x * x / (p * p)); };
      break;
    case Distribution::Laplace:
      upper = 90.0 * p;
      density = [p](double x) { return std::exp(-x / p) / p; };
      break;
    case Distribution::UniformCentered:
      upper = p;
      density = [p](double) { return 1.0 / p; };
      break;
    default: throw Error(Errc::not_computable, "no quadrature for " + spec.name());
  }
  const int m = 6000;
  const double h = upper / m;
  double s = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double x = i * h;
    const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * fam.phi(x / t) * density(x);
  }
  return s * h / 3.0;
}

// Luxemburg norm with a delta-method standard error:
// se ~ sd(Phi(|x|/N)) / sqrt(n) / |dG/dt(N)|, G(t) = mean Phi(|x|/t).
Term luxemburg_with_band(const YoungFamily& fam, const std::vector<double>& xs) {
  Term out;
  out.value = luxemburg_point(fam, xs);
  if (out.value <= 0.0) return out;
  const double n = static_cast<double>(xs.size());
  double s1 = 0.0, s2 = 0.0, dg = 0.0;
  for (double x : xs) {
    const double z = std::abs(x) / out.value;
    const double v = fam.phi(z);
    s1 += v;
    s2 += v * v;
    dg += fam.phi_prime(z) * z / out.value;
  }
  const double var = std::max(0.0, s2 / n - (s1 / n) * (s1 / n));
  dg /= n;
  out.err = dg > 0.0 ? std::sqrt(var / n) / dg : 0.0;
  return out;
}

std::uint64_t index_key(const MultiIndex& u) {
  std::uint64_t h = 0x1d3a'77ULL;
  for (auto c : u.coords()) h = mix64(h ^ static_cast<std::uint64_t>(c));
  return h;
}

bool hannan_series(ConditionKind k) { return k == ConditionKind::Hannan2 || k == ConditionKind::HannanPhi; }

class TermEngine {
 public:
  TermEngine(const FieldModel& model, const InnovationSpec& spec, ConditionKind which, const ConditionOptions& opts)
      : model_(model), spec_(spec), which_(which), opts_(opts), fam_(model.dim()) {
    const bool lin = model.kind() != ModelKind::Volterra;
    const bool lin_only = which == ConditionKind::CondLin || which == ConditionKind::CondLinPractical;
    const bool volt_only = which == ConditionKind::CondVolt || which == ConditionKind::CondVoltPractical;
    if ((lin_only && !lin) || (volt_only && lin))
      throw Error(Errc::not_computable, to_string(which) + " is not defined for a " + to_string(model.kind()) + " model");
    if (model.kind() == ModelKind::IidDiff && (lin_only || volt_only))
      throw Error(Errc::not_computable, to_string(which) + " needs coefficients");
    if (model.kind() == ModelKind::IidDiff) {
      iid_ = FieldModel::linear(model.dim(), CoefficientFamily::delta(), 1);
      lin_ = iid_.as_linear();
    } else {
      lin_ = model.as_linear();
    }
    volt_ = model.as_volterra();
    l2_ = spec.l2_norm();
    if (which == ConditionKind::HannanPhi || which == ConditionKind::RatioPhi) {
      if (!spec.has_orlicz_moment(model.dim())) phi_norm_ = kInf;
      else if (lin_) phi_norm_ = innovation_phi_norm(spec, model.dim());
    }
    if (volt_ && (which == ConditionKind::Hannan2 || which == ConditionKind::HannanPhi)) {
      for (const auto& t : volt_->terms) {
        const MultiIndex w = meet(t.u, t.v);
        p0_[w].push_back({w - t.u, w - t.v, t.a});
      }
    }
  }

  bool monte_carlo() const {
    if (which_ == ConditionKind::HannanPhi) return volt_ != nullptr;
    if (which_ == ConditionKind::RatioPhi) return volt_ != nullptr || spec_.dist != Distribution::Gaussian;
    return false;
  }

  double phi_inv(double y) const {
    return young_inverse(fam_, InverseKind::Phi, y);
  }

  Term operator()(const MultiIndex& u) const {
    switch (which_) {
      case ConditionKind::Hannan2: return {hannan(u, false), 0.0};
      case ConditionKind::HannanPhi: return volt_ ? volterra_phi(p0_chaos(u), u, false) : Term{hannan(u, true), 0.0};
      case ConditionKind::RatioL2: {
        const double n2 = volt_ ? chaos_l2_norm(e1_chaos(u), spec_) : std::sqrt(lin_tail_sq(u)) * l2_;
        return {n2 / std::sqrt(vol(u)), 0.0};
      }
      case ConditionKind::RatioPhi: {
        Term t = volt_ ? volterra_phi(e1_chaos(u), u, true) : linear_e1_phi(u);
        const double w = phi_inv(vol(u));
        return {t.value / w, t.err / w};
      }
      case ConditionKind::CondLin:
      case ConditionKind::CondVolt: {
        const double c = which_ == ConditionKind::CondLin ? lin_tail_sq(u) : volt_tail_sq(u);
        return {std::sqrt(c) / phi_inv(vol(u)), 0.0};
      }
      case ConditionKind::CondLinPractical:
      case ConditionKind::CondVoltPractical: {
        const double c = which_ == ConditionKind::CondLinPractical ? lin_tail_sq(u) : volt_tail_sq(u);
        const double k = vol(u);
        const double w = std::sqrt(std::log(k) / k);
        return {w == 0.0 ? 0.0 : w * std::sqrt(c), 0.0};
      }
    }
    return {};
  }

 private:
  double lin_coef(const MultiIndex& u) const {
    if (lin_->family.product_form()) {
      double a = 1.0;
      for (auto c : u.coords()) a *= lin_->family.factor(c);
      return a;
    }
    return lin_->coef(u);
  }

  double hannan(const MultiIndex& u, bool phi) const {
    if (volt_) {
      auto it = p0_.find(u);
      return it == p0_.end() ? 0.0 : chaos_l2_norm(it->second, spec_);
    }
    const double a = std::abs(lin_coef(u));
    if (a == 0.0) return 0.0;
    return a * (phi ? phi_norm_ : l2_);
  }

  // sum_{j >= u-1} a_j^2
  double lin_tail_sq(const MultiIndex& u) const {
    if (lin_->family.product_form()) {
      double t = 1.0;
      for (auto c : u.coords()) t *= lin_->family.tail_pow(c - 1, 2);
      return t;
    }
    double s = 0.0;
    const MultiIndex lo = u - MultiIndex(u.dim(), 1);
    for (const auto& t : lin_->terms)
      if (precedes(lo, t.lag)) s += t.a * t.a;
    return s;
  }

  // sum_{(u',v') >= (u-1,u-1), u' != v'} a_{u'v'}^2
  double volt_tail_sq(const MultiIndex& u) const {
    const MultiIndex lo = u - MultiIndex(u.dim(), 1);
    if (volt_->family.product_form()) {
      double t2 = 1.0, t4 = 1.0;
      for (auto c : u.coords()) {
        t2 *= volt_->family.tail_pow(c - 1, 2);
        t4 *= volt_->family.tail_pow(c - 1, 4);
      }
      if (!std::isfinite(t2)) return kInf;
      return std::max(0.0, t2 * t2 - t4);
    }
    double s = 0.0;
    for (const auto& t : volt_->terms)
      if (precedes(lo, t.u) && precedes(lo, t.v)) s += t.a * t.a;
    return s;
  }

  Chaos p0_chaos(const MultiIndex& u) const {
    auto it = p0_.find(u);
    return it == p0_.end() ? Chaos{} : it->second;
  }

  Chaos e1_chaos(const MultiIndex& u) const {
    return cond_expect_chaos(model_, u, MultiIndex(u.dim(), 1));
  }

  Term volterra_phi(const Chaos& c, const MultiIndex& u, bool decoupled) const {
    if (c.empty()) return {};
    if (!std::isfinite(phi_norm_) && phi_norm_ > 0) return {kInf, 0.0};
    const auto xs = chaos_samples(c, spec_, opts_.mc_samples, derive_seed(opts_.seed, index_key(u), 1), decoupled);
    return luxemburg_with_band(fam_, xs);
  }

  // ||E_1 X_u||_Phi for a Linear model.
  Term linear_e1_phi(const MultiIndex& u) const {
    const double tail = lin_tail_sq(u);
    if (!std::isfinite(tail) || !std::isfinite(phi_norm_)) return {kInf, 0.0};
    if (tail == 0.0) return {};
    if (spec_.dist == Distribution::Gaussian) return {std::sqrt(tail) * phi_norm_, 0.0};
    const int d = u.dim();
    const MultiIndex one(d, 1);
    if (!lin_->family.product_form()) {
      Chaos c;
      for (const auto& t : lin_->terms)
        if (precedes(u - one, t.lag)) c.push_back({u - t.lag, std::nullopt, t.a});
      return luxemburg_with_band(fam_, chaos_samples(c, spec_, opts_.mc_samples, derive_seed(opts_.seed, index_key(u), 2)));
    }
    // Exact leading window plus a Gaussian stand-in for the remaining
    // (many small, independent) terms with matching variance.
    constexpr int kWindow = 4;
    std::vector<double> coefs;
    double head = 0.0;
    for_each_in_box(MultiIndex(d), MultiIndex(d, kWindow), [&](const MultiIndex& s) {
      const double a = lin_coef(u - one + s);
      if (a != 0.0) {
        coefs.push_back(a);
        head += a * a;
      }
    });
    const double rem = std::sqrt(std::max(0.0, tail - head) * spec_.variance());
    const std::uint64_t seed = derive_seed(opts_.seed, index_key(u), 3);
    const SeedContext ctx{seed, seed, 0x77696eULL};
    const SeedContext gctx{seed, derive_seed(seed, 9), 0x77696eULL};
    const auto gauss = InnovationSpec::gaussian(1.0);
    std::vector<double> xs(opts_.mc_samples);
    for (std::size_t s = 0; s < xs.size(); ++s) {
      const auto row = static_cast<std::int64_t>(s) + 1;
      double v = 0.0;
      for (std::size_t i = 0; i < coefs.size(); ++i)
        v += coefs[i] * innovation_at(spec_, ctx, MultiIndex{static_cast<std::int64_t>(i) + 1, row});
      if (rem > 0.0) v += rem * innovation_at(gauss, gctx, MultiIndex{1, row});
      xs[s] = v;
    }
    return luxemburg_with_band(fam_, xs);
  }

  const FieldModel& model_;
  FieldModel iid_;
  const InnovationSpec& spec_;
  ConditionKind which_;
  const ConditionOptions& opts_;
  YoungFamily fam_;
  const LinearModel* lin_ = nullptr;
  const VolterraModel* volt_ = nullptr;
  double l2_ = 0.0;
  double phi_norm_ = 0.0;
  std::map<MultiIndex, Chaos> p0_;
};

}  // namespace

std::string to_string(ConditionKind kind) {
  switch (kind) {
    case ConditionKind::Hannan2: return "hannan2";
    case ConditionKind::HannanPhi: return "hannanPhi";
    case ConditionKind::RatioL2: return "ratioL2";
    case ConditionKind::RatioPhi: return "ratioPhi";
    case ConditionKind::CondLin: return "condLin";
    case ConditionKind::CondLinPractical: return "condLinPractical";
    case ConditionKind::CondVolt: return "condVolt";
    case ConditionKind::CondVoltPractical: return "condVoltPractical";
  }
  return "?";
}

std::vector<ConditionKind> all_conditions() {
  return {ConditionKind::Hannan2, ConditionKind::HannanPhi, ConditionKind::RatioL2,
          ConditionKind::RatioPhi, ConditionKind::CondLin, ConditionKind::CondLinPractical,
          ConditionKind::CondVolt, ConditionKind::CondVoltPractical};
}

ConditionKind condition_from_string(const std::string& s) {
  for (auto k : all_conditions())
    if (to_string(k) == s) return k;
  throw Error(Errc::invalid_config, "unknown condition '" + s + "'");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Converges: return "converges";
    case Verdict::Diverges: return "diverges";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict classify_increments(const std::vector<double>& increments, const std::vector<double>& error_bands) {
  for (double v : increments)
    if (!std::isfinite(v)) return Verdict::Diverges;
  const std::size_t n = increments.size();
  if (n < 3) return Verdict::Inconclusive;
  std::vector<double> e(increments);
  for (std::size_t i = 0; i < n; ++i) {
    const double band = i < error_bands.size() ? error_bands[i] : 0.0;
    if (e[i] <= 2.0 * band) e[i] = 0.0;
  }
  auto ratio = [](double num, double den) {
    if (num == 0.0) return 0.0;
    return den == 0.0 ? kInf : num / den;
  };
  const double r1 = ratio(e[n - 2], e[n - 3]), r2 = ratio(e[n - 1], e[n - 2]);
  if (r1 < 0.5 && r2 < 0.5) return Verdict::Converges;
  if (e[n - 1] > 0.0 && e[n - 3] <= e[n - 2] && e[n - 2] <= e[n - 1]) return Verdict::Diverges;
  return Verdict::Inconclusive;
}

double innovation_phi_norm(const InnovationSpec& spec, int d) {
  spec.validate();
  const YoungFamily fam(d);
  if (!spec.has_orlicz_moment(d)) return kInf;
  switch (spec.dist) {
    case Distribution::Rademacher: return 1.0 / young_inverse(fam, InverseKind::Phi, 1.0);
    case Distribution::HeavyTailDiagnostic: {
      const auto xs = innovation_samples(spec, 200000, 0x6e6f726dULL);
      return luxemburg_point(fam, xs);
    }
    default: break;
  }
  // G(t) = E Phi(|xi|/t) decreases in t; bisect log t.
  double lo = std::log(spec.l2_norm()) - 8.0, hi = lo + 16.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (expected_phi(fam, spec, std::exp(mid)) > 1.0 ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

SeriesDiagnostic check_condition(const FieldModel& model, const InnovationSpec& spec, ConditionKind which, int K,
                                 const ConditionOptions& opts) {
  if (K < 1 || K > 40) throw Error(Errc::domain_error, "level count K must be in 1..40");
  spec.validate();
  const int d = model.dim();
  TermEngine engine(model, spec, which, opts);

  SeriesDiagnostic out;
  out.which = which;
  out.monte_carlo = engine.monte_carlo();
  const std::int64_t origin = hannan_series(which) ? 0 : 1;
  std::int64_t prev = 0;
  for (int l = 1; l <= K; ++l) {
    const std::int64_t L = std::int64_t{1} << l;
    // Shell of the box [origin, origin + L - 1]^d outside the previous box.
    std::vector<MultiIndex> shell;
    for_each_in_box(MultiIndex(d, origin), MultiIndex(d, origin + L - 1), [&](const MultiIndex& u) {
      std::int64_t m = 0;
      for (auto c : u.coords()) m = std::max(m, c - origin);
      if (m >= prev) shell.push_back(u);
    });
    std::vector<Term> terms(shell.size());
    parallel_for(shell.size(), [&](std::size_t i) { terms[i] = engine(shell[i]); });
    double inc = 0.0, var = 0.0;
    for (const auto& t : terms) {
      inc += t.value;
      var += t.err * t.err;
    }
    out.levels.push_back(L);
    out.increments.push_back(inc);
    out.error_bands.push_back(std::sqrt(var));
    out.partial_sums.push_back((out.partial_sums.empty() ? 0.0 : out.partial_sums.back()) + inc);
    prev = L;
  }
  const std::size_t n = out.increments.size();
  if (n >= 2) {
    const double a = out.increments[n - 1], b = out.increments[n - 2];
    out.tail_ratio = a == 0.0 ? 0.0 : (b == 0.0 ? kInf : a / b);
  }
  out.verdict = classify_increments(out.increments, out.error_bands);
  if (out.monte_carlo) out.note = "Monte-Carlo Luxemburg terms; increments within 2 standard errors of 0 count as 0";
  if (which == ConditionKind::RatioPhi && model.kind() == ModelKind::Volterra)
    out.note += "; decoupled product terms";
  return out;
}

ImplicationReport condition_implication_check(const FieldModel& model, const InnovationSpec& spec, int K,
                                              const ConditionOptions& opts) {
  if (model.kind() != ModelKind::Linear)
    throw Error(Errc::not_computable, "the implication check needs a Linear model");
  ImplicationReport rep;
  rep.ratio_phi = check_condition(model, spec, ConditionKind::RatioPhi, K, opts);
  rep.hannan_phi = check_condition(model, spec, ConditionKind::HannanPhi, K, opts);
  rep.consistent = !(rep.ratio_phi.verdict == Verdict::Converges && rep.hannan_phi.verdict == Verdict::Diverges);
  return rep;
}

std::vector<DominanceLevel> practical_dominance(const FieldModel& model, int K) {
  if (model.kind() != ModelKind::Linear) throw Error(Errc::not_computable, "dominance report needs a Linear model");
  const int d = model.dim();
  const auto spec = InnovationSpec::gaussian(1.0);
  const YoungFamily fam(d);
  const ConditionOptions opts;
  TermEngine t_lin(model, spec, ConditionKind::CondLin, opts);
  TermEngine t_pr(model, spec, ConditionKind::CondLinPractical, opts);
  std::vector<DominanceLevel> out;
  std::int64_t prev = 0;
  for (int l = 1; l <= K; ++l) {
    const std::int64_t L = std::int64_t{1} << l;
    DominanceLevel lvl;
    lvl.level = L;
    lvl.terms_dominate = true;
    for_each_in_box(MultiIndex(d, 1), MultiIndex(d, L), [&](const MultiIndex& k) {
      std::int64_t m = 0;
      for (auto c : k.coords()) m = std::max(m, c - 1);
      if (m < prev || volume(k) < 2) return;
      const double kk = vol(k);
      const double w_lin = 1.0 / young_inverse(fam, InverseKind::Phi, kk);
      const double w_pr = std::sqrt(std::log(kk) / kk);
      const double r = w_lin / w_pr;
      lvl.max_weight_ratio = std::max(lvl.max_weight_ratio, r);
      if (r <= 1.0 && t_pr(k).value < t_lin(k).value) lvl.terms_dominate = false;
    });
    lvl.weight_dominates = lvl.max_weight_ratio <= 1.0;
    out.push_back(lvl);
    prev = L;
  }
  return out;
}

FieldModel slow_decay_control(int d) { return FieldModel::linear(d, CoefficientFamily::polynomial(0.75), 8); }

}  // namespace qfclt
