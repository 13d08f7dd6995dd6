#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qfclt/innovations.hpp"
#include "qfclt/lattice.hpp"

namespace qfclt {

enum class FamilyKind { Delta, Geometric, Polynomial, Explicit };

/// Coefficients on N^d. The parametric kinds are product-form,
/// a_j = g(j_1) ... g(j_d) with g(t) = [t = 0], r^t or (1+t)^{-beta}.
struct CoefficientFamily {
  FamilyKind kind = FamilyKind::Delta;
  double param = 0.0;
  std::vector<std::pair<MultiIndex, double>> terms;  // Explicit only

  static CoefficientFamily delta() { return {FamilyKind::Delta, 0.0, {}}; }
  static CoefficientFamily geometric(double r) { return {FamilyKind::Geometric, r, {}}; }
  static CoefficientFamily polynomial(double beta) { return {FamilyKind::Polynomial, beta, {}}; }
  static CoefficientFamily explicit_list(std::vector<std::pair<MultiIndex, double>> t) {
    return {FamilyKind::Explicit, 0.0, std::move(t)};
  }

  bool product_form() const noexcept { return kind != FamilyKind::Explicit; }
  /// One-dimensional factor g(t), t >= 0. Product-form kinds only.
  double factor(std::int64_t t) const;
  /// sum_{t >= m} |g(t)|^p, untruncated; +inf when the series diverges.
  double tail_pow(std::int64_t m, int p) const;
  std::string name() const;
};

std::string to_string(FamilyKind kind);

struct LinearTerm {
  MultiIndex lag;  // j >= 0
  double a;
};

struct VolterraTerm {
  MultiIndex u, v;  // u != v, both >= 0
  double a;
};

/// X_k = sum_j a_j xi_{k-j}, truncated to j in [0, radius]^d.
struct LinearModel {
  int d = 0;
  int radius = 0;
  CoefficientFamily family;
  std::vector<LinearTerm> terms;  // nonzero coefficients, lexicographic
  std::vector<double> dense;      // a_j on [0,radius]^d, row-major

  double coef(const MultiIndex& j) const;
};

/// X_k = sum_{u != v} a_{u,v} xi_{k-u} xi_{k-v}. Product-form families give
/// a_{u,v} = b_u b_v off the diagonal with b the linear coefficients.
struct VolterraModel {
  int d = 0;
  int radius = 0;
  CoefficientFamily family;
  std::vector<VolterraTerm> terms;
};

/// Martingale-difference control: X_k = xi_k.
struct IidDiffModel {
  int d = 0;
};

enum class ModelKind { Linear, Volterra, IidDiff };

class FieldModel {
 public:
  static FieldModel linear(int d, CoefficientFamily family, int radius);
  static FieldModel volterra(int d, CoefficientFamily family, int radius);
  static FieldModel volterra_explicit(int d, std::vector<VolterraTerm> terms);
  static FieldModel iid_diff(int d);

  ModelKind kind() const noexcept { return static_cast<ModelKind>(repr_.index()); }
  int dim() const noexcept;
  /// Largest lag coordinate; 0 for IidDiff.
  int radius() const noexcept;
  std::string name() const;

  const LinearModel* as_linear() const { return std::get_if<LinearModel>(&repr_); }
  const VolterraModel* as_volterra() const { return std::get_if<VolterraModel>(&repr_); }

 private:
  std::variant<LinearModel, VolterraModel, IidDiffModel> repr_;
};

std::string to_string(ModelKind kind);

/// A finite Wiener-chaos expression in the innovations: first-order terms
/// (b absent) and products of two distinct innovations.
struct ChaosTerm {
  MultiIndex a;
  std::optional<MultiIndex> b;
  double coef;
};
using Chaos = std::vector<ChaosTerm>;

/// Merges terms on the same (unordered) index set and drops zeros.
Chaos canonicalize(Chaos c);
double chaos_eval(const Chaos& c, const InnovationSpec& spec, const SeedContext& ctx);
double chaos_l2_norm(const Chaos& c, const InnovationSpec& spec);
/// Independent draws of the chaos. With decoupled set, the two factors of a
/// product term come from independent copies of the innovation field.
std::vector<double> chaos_samples(const Chaos& c, const InnovationSpec& spec, std::size_t count,
                                  std::uint64_t seed, bool decoupled = false);

/// Symbolic X_k.
Chaos field_chaos(const FieldModel& model, const MultiIndex& k);
/// Symbolic E[X_k | F_c], F_c = sigma(xi_u : u <= c).
Chaos cond_expect_chaos(const FieldModel& model, const MultiIndex& k, const MultiIndex& c);
/// Symbolic P_j(X_k) from the closed form.
Chaos projection_chaos(const FieldModel& model, const MultiIndex& j, const MultiIndex& k);

double field_eval(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx,
                  const MultiIndex& k);

/// E[X_k | F_c] evaluated on the realization ctx, any c.
double cond_expect_field(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx,
                         const MultiIndex& k, const MultiIndex& c);

/// E[S_n | F_c] for a corner c of n (every c_k is 0 or n_k); throws
/// invalid_corner otherwise.
double cond_expect_sum(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx,
                       const Rect& n, const MultiIndex& c);

/// P_j(X_k) by the closed form for each model.
double projection(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx,
                  const MultiIndex& j, const MultiIndex& k);

/// P_j(X_k) by expanding prod_i (E_j - E_{j-e_i}) into 2^d signed
/// conditional expectations.
double projection_oracle(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx,
                         const MultiIndex& j, const MultiIndex& k);

struct SigmaReport {
  double sigma2 = 0.0;                 // E[D_0^2] for the truncated model
  std::optional<double> sigma2_limit;  // radius -> infinity, where closed-form
  Chaos d0;                            // D_0 = sum_{i>=0} P_0(X_i)
  std::string d0_description;
};

SigmaReport sigma2_theoretical(const FieldModel& model, const InnovationSpec& spec);

}  // namespace qfclt
