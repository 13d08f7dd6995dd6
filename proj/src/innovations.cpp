#include "qfclt/innovations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qfclt/error.hpp"

namespace qfclt {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kPastTag = 0x7061737400000000ULL;    // "past"
constexpr std::uint64_t kFutureTag = 0x6675747572650000ULL;  // "future"

// Uniform on (0,1], never 0 so logs are finite.
double to_unit(std::uint64_t h) { return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53; }

double stream_unit(std::uint64_t key, std::uint64_t k) { return to_unit(mix64(key + (k + 1) * kGolden)); }

// Z = int_1^inf e^{-2v} v^{-kappa} dv by composite Simpson; the integrand is
// below e^{-80} past v = 41.
double heavy_tail_normalizer(double kappa) {
  const int m = 40000;
  const double a = 1.0, b = 41.0, h = (b - a) / m;
  auto g = [&](double v) { return std::exp(-2.0 * v) * std::pow(v, -kappa); };
  double s = g(a) + g(b);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
  return s * h / 3.0;
}

double draw(const InnovationSpec& spec, std::uint64_t key) {
  switch (spec.dist) {
    case Distribution::Gaussian: {
      const double u1 = stream_unit(key, 0), u2 = stream_unit(key, 1);
      return spec.param * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    case Distribution::Rademacher:
      return (mix64(key ^ kGolden) >> 63) ? 1.0 : -1.0;
    case Distribution::Laplace: {
      const double u = stream_unit(key, 0) - 0.5;
      const double mag = -spec.param * std::log1p(-2.0 * std::abs(u));
      return u < 0 ? -mag : mag;
    }
    case Distribution::UniformCentered:
      return spec.param * (2.0 * stream_unit(key, 0) - 1.0);
    case Distribution::HeavyTailDiagnostic: {
      // |xi| = e^V with V on [1,inf) of density ~ e^{-2v} v^{-kappa}: proposal
      // 1 + Exp(2), accepted with probability v^{-kappa}.
      const double sign = (mix64(key ^ ~kGolden) >> 63) ? 1.0 : -1.0;
      for (std::uint64_t attempt = 0; attempt < 256; ++attempt) {
        const double v = 1.0 - 0.5 * std::log(stream_unit(key, 2 * attempt));
        if (stream_unit(key, 2 * attempt + 1) <= std::pow(v, -spec.param)) return sign * std::exp(v);
      }
      return sign * std::numbers::e;
    }
  }
  return 0.0;
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix64(mix64(mix64(a) ^ b) ^ (c * kGolden + 0x632be59bd9b4e019ULL));
}

void InnovationSpec::validate() const {
  if (dist == Distribution::Rademacher) return;
  if (!(param > 0.0) || !std::isfinite(param))
    throw Error(Errc::domain_error, name() + ": parameter must be a positive real");
  if (dist == Distribution::HeavyTailDiagnostic && !(param > 1.0))
    throw Error(Errc::domain_error, "heavy-tail kappa must exceed 1 for a finite variance");
}

double InnovationSpec::variance() const {
  switch (dist) {
    case Distribution::Gaussian: return param * param;
    case Distribution::Rademacher: return 1.0;
    case Distribution::Laplace: return 2.0 * param * param;
    case Distribution::UniformCentered: return param * param / 3.0;
    case Distribution::HeavyTailDiagnostic: return 1.0 / ((param - 1.0) * heavy_tail_normalizer(param));
  }
  return 0.0;
}

double InnovationSpec::l2_norm() const { return std::sqrt(variance()); }

bool InnovationSpec::has_orlicz_moment(int d) const {
  // For the heavy tail E[xi^2 log^{d-1}] ~ int v^{d-1-kappa} dv.
  if (dist == Distribution::HeavyTailDiagnostic) return param > static_cast<double>(d);
  return true;
}

std::string to_string(Distribution dist) {
  switch (dist) {
    case Distribution::Gaussian: return "gaussian";
    case Distribution::Rademacher: return "rademacher";
    case Distribution::Laplace: return "laplace";
    case Distribution::UniformCentered: return "uniform";
    case Distribution::HeavyTailDiagnostic: return "heavy_tail";
  }
  return "?";
}

Distribution distribution_from_string(const std::string& s) {
  for (auto d : {Distribution::Gaussian, Distribution::Rademacher, Distribution::Laplace,
                 Distribution::UniformCentered, Distribution::HeavyTailDiagnostic})
    if (to_string(d) == s) return d;
  throw Error(Errc::invalid_config, "unknown innovation distribution '" + s + "'");
}

std::string InnovationSpec::name() const {
  if (dist == Distribution::Rademacher) return "rademacher";
  return to_string(dist) + "(" + std::to_string(param) + ")";
}

bool in_past(const MultiIndex& u) {
  for (auto c : u.coords())
    if (c > 0) return false;
  return true;
}

double innovation_at(const InnovationSpec& spec, const SeedContext& ctx, const MultiIndex& u) {
  const bool past = in_past(u);
  std::uint64_t h = mix64(ctx.master_salt ^ (past ? kPastTag : kFutureTag));
  h = mix64(h ^ (past ? ctx.omega_seed : ctx.trial_seed));
  h = mix64(h ^ static_cast<std::uint64_t>(u.dim()));
  for (auto c : u.coords()) h = mix64(h ^ static_cast<std::uint64_t>(c));
  return draw(spec, h);
}

std::vector<double> innovation_samples(const InnovationSpec& spec, std::size_t n, std::uint64_t seed,
                                       std::uint64_t salt) {
  const SeedContext ctx{seed, seed, salt};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = innovation_at(spec, ctx, MultiIndex{static_cast<std::int64_t>(i) + 1});
  return out;
}

OrliczMomentReport orlicz_moment(const InnovationSpec& spec, int d, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1000) throw Error(Errc::domain_error, "orlicz_moment needs at least 1000 samples");
  spec.validate();
  const YoungFamily fam(d);
  const auto xs = innovation_samples(spec, n_samples, seed, 0x6d6f6d656e74ULL);
  std::vector<double> y(xs.size());
  std::transform(xs.begin(), xs.end(), y.begin(), [&](double x) { return fam.phi(std::abs(x)); });

  OrliczMomentReport rep;
  const double n = static_cast<double>(y.size());
  double total = 0.0;
  for (double v : y) total += v;
  rep.estimate.value = total / n;
  rep.estimate.samples_used = y.size();

  std::mt19937_64 rng(seed ^ 0xb007ULL);
  std::uniform_int_distribution<std::size_t> pick(0, y.size() - 1);
  const int resamples = 200;
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[pick(rng)];
    m = s / n;
  }
  double mm = 0.0;
  for (double m : means) mm += m;
  mm /= resamples;
  double ss = 0.0;
  for (double m : means) ss += (m - mm) * (m - mm);
  rep.estimate.std_error = std::sqrt(ss / (resamples - 1));

  for (std::size_t s = y.size(); s >= 64; s /= 2) rep.dyadic_sizes.push_back(s);
  std::reverse(rep.dyadic_sizes.begin(), rep.dyadic_sizes.end());
  for (auto s : rep.dyadic_sizes) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s; ++i) acc += y[i];
    rep.dyadic_means.push_back(acc / static_cast<double>(s));
  }

  // Hill estimator of the tail index of Phi_d(|xi|); E[Phi_d(|xi|)] < inf
  // needs an index above 1, light tails push it far above.
  std::vector<double> sorted = y;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const auto k = static_cast<std::size_t>(std::sqrt(n));
  double hill = 0.0;
  if (sorted[k] > 0.0) {
    for (std::size_t i = 0; i < k; ++i) hill += std::log(sorted[i] / sorted[k]);
    hill /= static_cast<double>(k);
  }
  rep.tail_index = hill > 0.0 ? 1.0 / hill : std::numeric_limits<double>::infinity();
  rep.divergence_suspected = rep.tail_index < 1.5;
  return rep;
}

}  // namespace qfclt
