#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qfclt/lattice.hpp"
#include "qfclt/orlicz.hpp"

namespace qfclt {

enum class Distribution { Gaussian, Rademacher, Laplace, UniformCentered, HeavyTailDiagnostic };

/// Law of the i.i.d. innovations. All laws are centered. The single
/// parameter is sigma (Gaussian), b (Laplace), a (uniform on [-a,a]) or the
/// log-exponent kappa of the heavy tail c / (x^3 (log x)^kappa); it is
/// ignored for Rademacher.
struct InnovationSpec {
  Distribution dist = Distribution::Gaussian;
  double param = 1.0;

  static InnovationSpec gaussian(double sigma = 1.0) { return {Distribution::Gaussian, sigma}; }
  static InnovationSpec rademacher() { return {Distribution::Rademacher, 1.0}; }
  static InnovationSpec laplace(double b) { return {Distribution::Laplace, b}; }
  static InnovationSpec uniform(double a) { return {Distribution::UniformCentered, a}; }
  static InnovationSpec heavy_tail(double kappa) { return {Distribution::HeavyTailDiagnostic, kappa}; }

  /// Throws domain_error for a non-positive parameter or kappa <= 1 (the
  /// heavy tail needs a finite second moment).
  void validate() const;
  double variance() const;
  double l2_norm() const;
  /// E[xi^2 (log(1+|xi|))^{d-1}] < infinity?
  bool has_orlicz_moment(int d) const;
  std::string name() const;

  bool operator==(const InnovationSpec&) const = default;
};

std::string to_string(Distribution dist);
Distribution distribution_from_string(const std::string& s);

/// Seeds for one quenched draw. Sites with every coordinate <= 0 (the past)
/// depend only on omega_seed; all other sites only on trial_seed.
struct SeedContext {
  std::uint64_t omega_seed = 0;
  std::uint64_t trial_seed = 0;
  std::uint64_t master_salt = 0;

  bool operator==(const SeedContext&) const = default;
};

/// Counter-based mixing of a short key into 64 bits.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

bool in_past(const MultiIndex& u);

/// The innovation xi_u as a pure function of (spec, ctx, u).
double innovation_at(const InnovationSpec& spec, const SeedContext& ctx, const MultiIndex& u);

/// n draws xi_{(1)}, ..., xi_{(n)} of a one-dimensional stream under seed.
std::vector<double> innovation_samples(const InnovationSpec& spec, std::size_t n, std::uint64_t seed,
                                       std::uint64_t salt = 0);

struct OrliczMomentReport {
  NormEstimate estimate;               // E[Phi_d(|xi|)] with bootstrap spread
  std::vector<std::size_t> dyadic_sizes;
  std::vector<double> dyadic_means;    // running means over the first n/2^j samples
  double tail_index = 0.0;             // Hill estimate on Phi_d(|xi|), top sqrt(n) order statistics
  bool divergence_suspected = false;
};

/// Monte-Carlo estimate of E[Phi_d(|xi|)]. n_samples must be >= 1000.
OrliczMomentReport orlicz_moment(const InnovationSpec& spec, int d, std::size_t n_samples, std::uint64_t seed);

}  // namespace qfclt
