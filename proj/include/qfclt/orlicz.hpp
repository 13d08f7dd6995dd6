#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qfclt {

enum class YoungKind {
  Phi,     // x^2 (log(1+x))^{d-1}
  Psi,     // sup_y (x y - Phi(y)), the conjugate
  F,       // x^{(3-d)/(d-1)} (log(1 + x^{1/(d-1)}))^{d-1}
  Varphi,  // x (log(1+x))^{d-1}
  PhiPow,  // x^{d+1} (log(1+x))^{d-1}
};

enum class InverseKind {
  Phi,
  Varphi,
  PhiPow,
  FcompVarphiInv,  // evaluates f_d(varphi_d^{-1}(y)); f_d must be increasing
};

std::string to_string(YoungKind kind);

/// The Young-function family indexed by the dimension parameter d.
/// d = 1 is accepted as a degenerate case (Phi_1(x) = x^2); F and the
/// composition are undefined there.
class YoungFamily {
 public:
  explicit YoungFamily(int d);

  int d() const noexcept { return d_; }

  double phi(double x) const;
  double phi_prime(double x) const;
  double psi(double x) const;
  double f(double x) const;
  double varphi(double x) const;
  double phi_pow(double x) const;

  /// Is f_d increasing on [1e-6, 1e6]? Probed on a log grid once per family.
  bool f_is_monotone() const noexcept { return f_monotone_; }

 private:
  int d_;
  bool f_monotone_ = false;
};

/// Throws domain_error for x < 0 or NaN.
double young_eval(const YoungFamily& fam, YoungKind kind, double x);

/// Bracketed bisection. Throws unsupported_inverse for FcompVarphiInv when
/// f_d is not monotone, domain_error for y < 0.
double young_inverse(const YoungFamily& fam, InverseKind kind, double y);

struct NormEstimate {
  double value = 0.0;
  double std_error = 0.0;  // bootstrap standard deviation
  std::size_t samples_used = 0;
};

struct LuxemburgOptions {
  int bootstrap_resamples = 200;
  std::uint64_t seed = 0x5eed'0f'b007ULL;
};

/// inf{t > 0 : mean Phi(|x_i|/t) <= 1} on the empirical measure, without
/// bootstrap. kind must be Phi or Psi.
double luxemburg_point(const YoungFamily& fam, std::span<const double> samples,
                       YoungKind kind = YoungKind::Phi);

/// Point estimate plus bootstrap spread. Throws empty_input on no samples.
NormEstimate luxemburg_norm(const YoungFamily& fam, std::span<const double> samples,
                            YoungKind kind = YoungKind::Phi, LuxemburgOptions opts = {});

/// Sample mean of Phi_d(|x_i|).
double mean_phi(const YoungFamily& fam, std::span<const double> samples);

struct InequalityCheck {
  std::string name;
  bool applicable = true;
  bool holds = true;
  double slack = 0.0;  // rhs - lhs, relative to max(1, |rhs|) for pointwise checks
};

struct YoungLemmaReport {
  int d = 0;
  double mean_phi = 0.0;
  double norm_phi = 0.0;
  std::vector<InequalityCheck> checks;

  bool all_hold() const;
  double min_slack() const;
};

/// Evaluates the Luxemburg-norm lemmas and the scalar Phi_d / log
/// inequalities on the empirical distribution of |samples|.
YoungLemmaReport check_young_lemmas(const YoungFamily& fam, std::span<const double> samples);

}  // namespace qfclt
