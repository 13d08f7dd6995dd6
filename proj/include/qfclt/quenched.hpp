#pragma once

#include <cstdint>
#include <vector>

#include "qfclt/fields.hpp"
#include "qfclt/stats.hpp"
#include "qfclt/sums.hpp"

namespace qfclt {

struct QuenchedConfig {
  FieldModel model;
  InnovationSpec spec;
  std::vector<std::uint64_t> omega_seeds;
  std::vector<Rect> n_list;
  Grid grid;
  int trials = 0;
  PathMode mode = PathMode::Rectangular;
  std::uint64_t master_salt = 0;

  /// Throws invalid_config for empty seed or size lists, trials < 1, a grid
  /// outside [0,1]^d, mismatched dimensions or non-square n in cubic mode.
  void validate() const;
};

struct EnsembleCell {
  std::uint64_t omega_seed = 0;
  std::size_t n_index = 0;
  Rect n;
  std::vector<PathSample> paths;
  MeanEstimate sigma2_empirical;  // mean of the squared terminal value

  /// Path values at grid point i across trials.
  std::vector<double> marginal(std::size_t i, bool centered = true) const;
  std::vector<double> terminal(bool centered = true) const;
};

struct QuenchedEnsemble {
  Grid grid;
  std::vector<EnsembleCell> cells;  // omega-major, then n
  std::size_t n_count = 0;
  /// trials < 100; with trials < 2 the variance estimates are NaN.
  bool degenerate = false;

  const EnsembleCell& cell(std::size_t omega_index, std::size_t n_index) const;
};

/// Deterministic in cfg: trial k of (omega, n_list[j]) uses
/// trial_seed_for(omega, j, k).
QuenchedEnsemble run_quenched_mc(const QuenchedConfig& cfg);

/// W_t on the grid from i.i.d. N(0, 1/|n_cells|) cell increments.
PathSample brownian_sheet_sample(const Grid& grid, const Rect& n_cells, std::uint64_t seed);
std::vector<PathSample> brownian_sheet_samples(const Grid& grid, const Rect& n_cells, std::size_t count,
                                               std::uint64_t seed);

/// KS of the marginal at grid point i against N(0, sigma2 prod t). Needs at
/// least 500 paths (domain_error) and sigma2 > 0 (invalid_variance). A
/// target with zero variance passes iff every value is 0.
KsResult ks_marginal_test(const EnsembleCell& cell, double sigma2, std::size_t i, double alpha = 0.01,
                          bool centered = true);

/// Every grid point at alpha / |grid|.
std::vector<KsResult> ks_grid_test(const EnsembleCell& cell, double sigma2, double alpha = 0.01);

struct CovarianceEntry {
  std::size_t s = 0, t = 0;  // grid indices
  double empirical = 0.0;
  double target = 0.0;
  double rel_error = 0.0;
  double std_error = 0.0;  // of the empirical covariance
  double z = 0.0;          // (empirical - target) / std_error
};

struct FddReport {
  double max_rel_error = 0.0;
  double max_abs_z = 0.0;
  std::vector<CovarianceEntry> entries;  // pairs s <= t with target >= 0.05 sigma2
};

/// Needs at least 500 paths and a grid of at least 4 points.
FddReport fdd_covariance_check(const EnsembleCell& cell, double sigma2, const Grid& grid);

struct KsPair {
  std::string a, b;
  KsResult result;
};

struct ComparisonReport {
  std::vector<KsPair> pairs;  // omega vs omega, then each omega vs annealed
  double alpha = 0.01;        // per-family level, Bonferroni over pairs
  bool all_pass = true;
};

/// Terminal-value laws of the cells for n_list[n_index] compared pairwise and
/// against an annealed ensemble whose past is redrawn in every trial.
/// Needs at least two omega seeds.
ComparisonReport quenched_vs_annealed(const QuenchedConfig& cfg, const QuenchedEnsemble& ens,
                                      std::size_t n_index = 0, bool centered = true, double alpha = 0.01);

}  // namespace qfclt
