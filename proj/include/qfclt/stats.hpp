#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qfclt {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double normal_cdf(double x, double variance = 1.0);

double mean(std::span<const double> x);
/// Unbiased sample variance; 0 for fewer than two samples.
double sample_variance(std::span<const double> x);
/// Unbiased sample covariance of paired samples.
double sample_covariance(std::span<const double> x, std::span<const double> y);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_sf(double lambda);

struct KsResult {
  double statistic = 0.0;
  double critical_value = 0.0;
  double p_value = 1.0;
  double alpha = 0.01;
  std::size_t n = 0;
  bool pass = false;
};

/// Two-sided one-sample KS against a continuous cdf. The critical value uses
/// the asymptotic Kolmogorov law with Stephens' finite-n correction.
KsResult ks_one_sample(std::span<const double> x, const std::function<double(double)>& cdf, double alpha);
/// Two-sided two-sample KS with effective size nm/(n+m).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double alpha);

}  // namespace qfclt
