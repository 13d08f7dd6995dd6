#include "qfclt/rosenthal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qfclt/error.hpp"
#include "qfclt/parallel.hpp"
#include "qfclt/stats.hpp"

namespace qfclt {

namespace {

constexpr double kUpperZ = 2.326;  // one-sided 99% normal quantile
constexpr std::size_t kLhsSamples = 200000;

}  // namespace

std::string to_string(DiffField f) { return f == DiffField::Iid ? "iid" : "product"; }

DiffField diff_field_from_string(const std::string& s) {
  if (s == "iid") return DiffField::Iid;
  if (s == "product") return DiffField::Product;
  throw Error(Errc::invalid_config, "difference field must be 'iid' or 'product', got '" + s + "'");
}

RosenthalConstants rosenthal_constants(int d) {
  return {12.0 * std::pow(std::numbers::ln2, 1.0 - d), 2.0 * std::pow(3.0, 0.5 * (d + 5))};
}

double rosenthal_rhs(int d, double m_norm, bool* phi_only) {
  const YoungFamily fam(d);
  const auto c = rosenthal_constants(d);
  const double x = c.c2 * m_norm;
  double best = fam.phi_pow(x);
  bool only = true;
  if (d >= 2 && fam.f_is_monotone()) {
    best = std::max(best, young_inverse(fam, InverseKind::FcompVarphiInv, x));
    only = false;
  }
  if (phi_only) *phi_only = only;
  return c.c1 * best;
}

RosenthalReport rosenthal_check(int d, const InnovationSpec& spec, const Rect& n, int trials, DiffField field,
                                std::uint64_t seed) {
  if (trials < 1000) throw Error(Errc::domain_error, "rosenthal_check needs at least 1000 trials");
  if (n.dim() != d) throw Error(Errc::domain_error, "rectangle dimension differs from d");
  spec.validate();
  const YoungFamily fam(d);
  RosenthalReport rep;
  rep.d = d;
  rep.n = n;
  rep.spec = spec;
  rep.field = field;
  rep.trials = trials;
  rep.constants = rosenthal_constants(d);
  const double vol = static_cast<double>(n.volume());

  // Every |d_u| is 1 for Rademacher in both generators.
  if (spec.dist == Distribution::Rademacher) {
    rep.lhs = vol * fam.phi(1.0);
    rep.lhs_exact = true;
  } else {
    std::vector<double> v(kLhsSamples);
    const SeedContext ctx{seed, derive_seed(seed, 0x6c6873ULL), 0x6c6873ULL};
    parallel_for(v.size(), [&](std::size_t s) {
      double x = 1.0;
      const int factors = field == DiffField::Iid ? 1 : d;
      for (int k = 0; k < factors; ++k)
        x *= innovation_at(spec, ctx, MultiIndex{static_cast<std::int64_t>(s) + 1, k + 1});
      v[s] = fam.phi(std::abs(x));
    });
    rep.lhs = vol * mean(v);
    rep.lhs_std_error = vol * std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
  }

  std::vector<double> m(static_cast<std::size_t>(trials));
  parallel_for(m.size(), [&](std::size_t t) {
    const std::uint64_t ts = derive_seed(seed, 0x4d6eULL, t);
    const SeedContext ctx{ts, ts, 0x726f73ULL};
    if (field == DiffField::Iid) {
      CompensatedSum s;
      for (const auto& u : rect_iter(n)) s.add(innovation_at(spec, ctx, u));
      m[t] = s.value();
    } else {
      // sum_u prod_k eta^(k)_{u_k} = prod_k sum_{t <= n_k} eta^(k)_t
      double prod = 1.0;
      for (int k = 0; k < d; ++k) {
        double s = 0.0;
        for (std::int64_t i = 1; i <= n.upper()[k]; ++i) s += innovation_at(spec, ctx, MultiIndex{k + 1, i});
        prod *= s;
      }
      m[t] = prod;
    }
  });
  rep.m_norm = luxemburg_norm(fam, m, YoungKind::Phi, {200, derive_seed(seed, 0xb0075ULL)});
  rep.m_norm_upper = rep.m_norm.value + kUpperZ * rep.m_norm.std_error;
  rep.rhs = rosenthal_rhs(d, rep.m_norm_upper, &rep.phi_branch_only);
  rep.verdict = rep.lhs <= rep.rhs;
  rep.slack_ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  if (rep.phi_branch_only) rep.flags.push_back("phi_branch_only");
  rep.flags.push_back("f_composed_with_varphi_inverse");
  return rep;
}

std::vector<RosenthalReport> rosenthal_sweep(int d, const InnovationSpec& spec, const std::vector<Rect>& n_list,
                                             int trials, DiffField field, std::uint64_t seed) {
  std::vector<RosenthalReport> out;
  out.reserve(n_list.size());
  for (std::size_t i = 0; i < n_list.size(); ++i)
    out.push_back(rosenthal_check(d, spec, n_list[i], trials, field, derive_seed(seed, i)));
  return out;
}

}  // namespace qfclt
