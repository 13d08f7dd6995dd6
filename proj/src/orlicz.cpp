#include "qfclt/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qfclt/error.hpp"

namespace qfclt {

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

void check_arg(double x) {
  if (!(x >= 0.0)) throw Error(Errc::domain_error, "argument must be >= 0, got " + std::to_string(x));
}

// Inverse of an increasing g with g(0) = 0 by bisection to machine precision.
template <class G>
double invert_increasing(G&& g, double y) {
  if (y == 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (g(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw Error(Errc::domain_error, "inverse bracket overflow for y=" + std::to_string(y));
  }
  for (int it = 0; it < 4000; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) < y)
      lo = mid;
    else
      hi = mid;
  }
  // Pick the endpoint with the smaller residual.
  return std::abs(g(lo) - y) <= std::abs(g(hi) - y) ? lo : hi;
}

}  // namespace

std::string to_string(YoungKind kind) {
  switch (kind) {
    case YoungKind::Phi: return "Phi";
    case YoungKind::Psi: return "Psi";
    case YoungKind::F: return "F";
    case YoungKind::Varphi: return "Varphi";
    case YoungKind::PhiPow: return "PhiPow";
  }
  return "?";
}

YoungFamily::YoungFamily(int d) : d_(d) {
  if (d < 1) throw Error(Errc::domain_error, "Young family needs d >= 1, got " + std::to_string(d));
  if (d >= 2) {
    f_monotone_ = true;
    double prev = f(1e-6);
    for (int i = 1; i <= 480; ++i) {
      const double x = std::pow(10.0, -6.0 + 12.0 * i / 480.0);
      const double v = f(x);
      if (!(v > prev)) {
        f_monotone_ = false;
        break;
      }
      prev = v;
    }
  }
}

double YoungFamily::phi(double x) const { return x * x * ipow(std::log1p(x), d_ - 1); }

double YoungFamily::phi_prime(double x) const {
  const double l = std::log1p(x);
  double v = 2.0 * x * ipow(l, d_ - 1);
  if (d_ >= 2) v += (d_ - 1) * x * x * ipow(l, d_ - 2) / (1.0 + x);
  return v;
}

double YoungFamily::psi(double x) const {
  if (x == 0.0) return 0.0;
  // The sup is attained where phi'(y) = x; phi' is increasing from 0.
  const double y = invert_increasing([this](double t) { return phi_prime(t); }, x);
  return std::max(0.0, x * y - phi(y));
}

double YoungFamily::f(double x) const {
  if (d_ < 2) throw Error(Errc::domain_error, "f_d is undefined for d = 1");
  if (x == 0.0) return 0.0;
  const double e = 1.0 / (d_ - 1);
  return std::pow(x, (3.0 - d_) * e) * ipow(std::log1p(std::pow(x, e)), d_ - 1);
}

double YoungFamily::varphi(double x) const { return x * ipow(std::log1p(x), d_ - 1); }

double YoungFamily::phi_pow(double x) const { return ipow(x, d_ + 1) * ipow(std::log1p(x), d_ - 1); }

double young_eval(const YoungFamily& fam, YoungKind kind, double x) {
  check_arg(x);
  switch (kind) {
    case YoungKind::Phi: return fam.phi(x);
    case YoungKind::Psi: return fam.psi(x);
    case YoungKind::F: return fam.f(x);
    case YoungKind::Varphi: return fam.varphi(x);
    case YoungKind::PhiPow: return fam.phi_pow(x);
  }
  return 0.0;
}

double young_inverse(const YoungFamily& fam, InverseKind kind, double y) {
  check_arg(y);
  switch (kind) {
    case InverseKind::Phi: return invert_increasing([&](double x) { return fam.phi(x); }, y);
    case InverseKind::Varphi: return invert_increasing([&](double x) { return fam.varphi(x); }, y);
    case InverseKind::PhiPow: return invert_increasing([&](double x) { return fam.phi_pow(x); }, y);
    case InverseKind::FcompVarphiInv: {
      if (fam.d() < 2 || !fam.f_is_monotone())
        throw Error(Errc::unsupported_inverse,
                    "f_d is not monotone for d=" + std::to_string(fam.d()) + " on [1e-6,1e6]");
      return fam.f(invert_increasing([&](double x) { return fam.varphi(x); }, y));
    }
  }
  return 0.0;
}

double mean_phi(const YoungFamily& fam, std::span<const double> samples) {
  if (samples.empty()) throw Error(Errc::empty_input, "mean_phi of an empty sample");
  double s = 0.0;
  for (double x : samples) s += fam.phi(std::abs(x));
  return s / static_cast<double>(samples.size());
}

double luxemburg_point(const YoungFamily& fam, std::span<const double> samples, YoungKind kind) {
  if (samples.empty()) throw Error(Errc::empty_input, "Luxemburg norm of an empty sample");
  if (kind != YoungKind::Phi && kind != YoungKind::Psi)
    throw Error(Errc::domain_error, "Luxemburg norm supports Phi and Psi only");

  auto young = [&](double x) { return kind == YoungKind::Phi ? fam.phi(x) : fam.psi(x); };
  double sum = 0.0, mx = 0.0;
  for (double x : samples) {
    sum += std::abs(x);
    mx = std::max(mx, std::abs(x));
  }
  if (mx == 0.0) return 0.0;
  const double mean = sum / static_cast<double>(samples.size());

  // Jensen and the sup bound bracket the root: G(mean/c) >= 1 >= G(max/c)
  // where c is the kind's inverse at 1.
  const double c = invert_increasing(young, 1.0);
  double lo = mean / c, hi = mx / c;
  if (!(lo < hi)) return hi;

  auto excess = [&](double t) {
    double s = 0.0;
    for (double x : samples) s += young(std::abs(x) / t);
    return s / static_cast<double>(samples.size()) - 1.0;
  };
  for (int it = 0; it < 200 && hi / lo - 1.0 > 1e-13; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (excess(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

NormEstimate luxemburg_norm(const YoungFamily& fam, std::span<const double> samples, YoungKind kind,
                            LuxemburgOptions opts) {
  NormEstimate est;
  est.value = luxemburg_point(fam, samples, kind);
  est.samples_used = samples.size();
  if (opts.bootstrap_resamples <= 1) return est;

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
  std::vector<double> resample(samples.size());
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(opts.bootstrap_resamples));
  for (int b = 0; b < opts.bootstrap_resamples; ++b) {
    for (auto& r : resample) r = samples[pick(rng)];
    values.push_back(luxemburg_point(fam, resample, kind));
  }
  double m = 0.0;
  for (double v : values) m += v;
  m /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  est.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return est;
}

bool YoungLemmaReport::all_hold() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return !c.applicable || c.holds; });
}

double YoungLemmaReport::min_slack() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : checks)
    if (c.applicable) m = std::min(m, c.slack);
  return m;
}

namespace {

constexpr double kNumericalZero = -1e-8;

InequalityCheck make_check(std::string name, bool applicable, double slack) {
  return {std::move(name), applicable, !applicable || slack >= kNumericalZero, slack};
}

// min over samples and lambdas of (big - small) / max(1, |big|).
template <class Small, class Big>
double pointwise_slack(std::span<const double> xs, std::span<const double> lambdas, Small&& small, Big&& big) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : xs) {
    for (double lam : lambdas) {
      const double b = big(x, lam), s = small(x, lam);
      m = std::min(m, (b - s) / std::max(1.0, std::abs(b)));
    }
  }
  return m;
}

}  // namespace

YoungLemmaReport check_young_lemmas(const YoungFamily& fam, std::span<const double> samples) {
  if (samples.empty()) throw Error(Errc::empty_input, "lemma checks need samples");
  std::vector<double> h(samples.size());
  std::transform(samples.begin(), samples.end(), h.begin(), [](double x) { return std::abs(x); });

  YoungLemmaReport rep;
  rep.d = fam.d();
  rep.mean_phi = mean_phi(fam, h);
  rep.norm_phi = luxemburg_point(fam, h);

  const double e1 = std::numbers::e - 1.0;
  const double lam = young_inverse(fam, InverseKind::Phi, rep.mean_phi);
  rep.checks.push_back(make_check("lem_tool_small", lam <= e1, lam - rep.norm_phi));
  rep.checks.push_back(make_check("lem_tool_large", rep.mean_phi >= 1.0, rep.mean_phi - rep.norm_phi));

  std::vector<double> g(h.size());
  std::transform(h.begin(), h.end(), g.begin(), [&](double x) { return fam.varphi(x); });
  const double psi_norm = luxemburg_point(fam, g, YoungKind::Psi);
  rep.checks.push_back(make_check("psi_norm_of_varphi", true, rep.norm_phi - psi_norm));

  std::vector<double> xs;
  std::copy_if(h.begin(), h.end(), std::back_inserter(xs), [](double x) { return x > 0.0; });
  const double small_l[] = {0.05, 0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, e1};
  const double unit_l[] = {0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99};
  const double big_l[] = {1.0, 1.5, 2.0, 4.0, 10.0, 100.0};
  const double ln2 = std::numbers::ln2;

  rep.checks.push_back(make_check(
      "phi_scaling_small_lambda", true,
      pointwise_slack(xs, small_l, [&](double x, double l) { return fam.phi(x / l); },
                      [&](double x, double l) { return fam.phi(x) / fam.phi(l); })));
  rep.checks.push_back(make_check(
      "phi_scaling_convexity", true,
      pointwise_slack(xs, big_l, [&](double x, double l) { return fam.phi(x / l); },
                      [&](double x, double l) { return fam.phi(x) / l; })));
  rep.checks.push_back(make_check(
      "log_product_lower_small", true,
      pointwise_slack(xs, unit_l, [&](double x, double l) { return ln2 * l * std::log1p(x); },
                      [&](double x, double l) { return std::log1p(x / l) * std::log1p(l); })));
  rep.checks.push_back(make_check(
      "log_product_lower_large", true,
      pointwise_slack(xs, big_l, [&](double x, double l) { return ln2 * std::log1p(x) / l; },
                      [&](double x, double l) { return std::log1p(x / l) * std::log1p(l); })));
  return rep;
}

}  // namespace qfclt
