#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qfclt/fields.hpp"
#include "qfclt/innovations.hpp"

namespace qfclt {

enum class ConditionKind {
  Hannan2,            // sum_{u>=0} ||P_0 X_u||_2
  HannanPhi,          // sum_{u>=0} ||P_0 X_u||_Phi
  RatioL2,            // sum_{u>=1} ||E_1 X_u||_2 / |u|^{1/2}
  RatioPhi,           // sum_{u>=1} ||E_1 X_u||_Phi / Phi^{-1}(|u|)
  CondLin,            // sum_{k>=1} (sum_{j>=k-1} a_j^2)^{1/2} / Phi^{-1}(|k|)
  CondLinPractical,   // same with (log|k|)^{1/2} / |k|^{1/2}
  CondVolt,           // sum_{k>=1} (sum_{(u,v)>=(k-1,k-1), u!=v} a_uv^2)^{1/2} / Phi^{-1}(|k|)
  CondVoltPractical,
};

std::string to_string(ConditionKind kind);
ConditionKind condition_from_string(const std::string& s);
std::vector<ConditionKind> all_conditions();

enum class Verdict { Converges, Diverges, Inconclusive };
std::string to_string(Verdict v);

struct SeriesDiagnostic {
  ConditionKind which = ConditionKind::Hannan2;
  std::vector<std::int64_t> levels;   // L = 2, 4, ..., 2^K
  std::vector<double> partial_sums;   // sum over the level box
  std::vector<double> increments;     // partial_sums[l] - partial_sums[l-1]; first is partial_sums[0]
  std::vector<double> error_bands;    // Monte-Carlo standard error per increment (0 if exact)
  double tail_ratio = 0.0;            // last increment / previous increment
  Verdict verdict = Verdict::Inconclusive;
  bool monte_carlo = false;
  std::string note;
};

struct ConditionOptions {
  std::size_t mc_samples = 4000;
  int bootstrap_resamples = 50;
  std::uint64_t seed = 0xc0'4d'17'10'4eULL;
};

/// Partial sums of the chosen series over boxes of side L. Level-box
/// convention: u in [0, L-1]^d for the Hannan series, [1, L]^d otherwise.
/// Linear models with parametric families use the untruncated coefficient
/// tails; Volterra models use their truncated coefficients except for the
/// pure coefficient series, which take untruncated tails when product-form.
/// Throws not_computable for unsupported (model, which) pairs and
/// domain_error for K < 1.
SeriesDiagnostic check_condition(const FieldModel& model, const InnovationSpec& spec, ConditionKind which, int K,
                                 const ConditionOptions& opts = {});

/// Verdict from the increment sequence: converges when the last two
/// successive increment ratios are below 0.5 (0/0 counts as 0), diverges
/// when some term is infinite or the last three increments are
/// nondecreasing and positive, inconclusive otherwise.
Verdict classify_increments(const std::vector<double>& increments, const std::vector<double>& error_bands = {});

/// ||xi||_Phi_d: quadrature for the light-tailed laws, Monte Carlo for the
/// heavy tail (+inf when E Phi_d(|xi|) diverges).
double innovation_phi_norm(const InnovationSpec& spec, int d);

struct ImplicationReport {
  SeriesDiagnostic ratio_phi;
  SeriesDiagnostic hannan_phi;
  bool consistent = true;  // not (ratioPhi converges and hannanPhi diverges)
};

/// Requires a Linear model (closed forms); throws not_computable otherwise.
ImplicationReport condition_implication_check(const FieldModel& model, const InnovationSpec& spec, int K,
                                              const ConditionOptions& opts = {});

struct DominanceLevel {
  std::int64_t level = 0;
  double max_weight_ratio = 0.0;  // max over the shell, |k| >= 2, of (1/Phi^{-1}(|k|)) / ((log|k|)^{1/2}/|k|^{1/2})
  bool weight_dominates = false;  // max_weight_ratio <= 1
  bool terms_dominate = false;    // practical term >= lin term on every shell index where weights dominate
};

/// Per-level comparison of the condLin and condLinPractical weights and terms.
std::vector<DominanceLevel> practical_dominance(const FieldModel& model, int K);

/// a_j = prod (1 + j_i)^{-3/4}: sum a_j^2 is finite but its coordinate tails
/// decay like m^{-1/2}, slowly enough that every coefficient series above diverges.
FieldModel slow_decay_control(int d);

}  // namespace qfclt
