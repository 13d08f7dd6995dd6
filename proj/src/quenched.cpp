#include "qfclt/quenched.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qfclt/error.hpp"
#include "qfclt/parallel.hpp"

namespace qfclt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double grid_volume(const Grid& g, std::size_t i) {
  double v = 1.0;
  for (int k = 0; k < g.d; ++k) v *= g.points[i][static_cast<std::size_t>(k)];
  return v;
}

MeanEstimate mean_square(const std::vector<double>& v) {
  MeanEstimate e;
  e.trials = v.size();
  if (v.empty()) {
    e.value = e.std_error = kNaN;
    return e;
  }
  std::vector<double> sq(v.size());
  std::transform(v.begin(), v.end(), sq.begin(), [](double x) { return x * x; });
  e.value = mean(sq);
  e.std_error = v.size() < 2 ? kNaN : std::sqrt(sample_variance(sq) / static_cast<double>(v.size()));
  if (v.size() < 2) e.value = kNaN;
  return e;
}

}  // namespace

void QuenchedConfig::validate() const {
  const int d = model.dim();
  if (d < 1) throw Error(Errc::invalid_config, "model is not set");
  if (omega_seeds.empty()) throw Error(Errc::invalid_config, "omega_seeds must not be empty");
  if (n_list.empty()) throw Error(Errc::invalid_config, "n_list must not be empty");
  if (trials < 1) throw Error(Errc::invalid_config, "trials must be >= 1");
  if (grid.d != d) throw Error(Errc::invalid_config, "grid dimension differs from the model dimension");
  try {
    grid.validate();
    spec.validate();
  } catch (const Error& e) {
    throw Error(Errc::invalid_config, e.what());
  }
  for (const auto& n : n_list) {
    if (n.dim() != d) throw Error(Errc::invalid_config, "n " + n.upper().str() + " has the wrong dimension");
    if (mode == PathMode::Cubic && !n.is_square())
      throw Error(Errc::invalid_config, "cubic mode needs square n, got " + n.upper().str());
  }
}

std::vector<double> EnsembleCell::marginal(std::size_t i, bool centered) const {
  std::vector<double> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(centered ? p.values.at(i) : p.uncentered.at(i));
  return out;
}

std::vector<double> EnsembleCell::terminal(bool centered) const {
  std::vector<double> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(centered ? p.terminal : p.terminal_uncentered);
  return out;
}

const EnsembleCell& QuenchedEnsemble::cell(std::size_t omega_index, std::size_t n_index) const {
  const std::size_t at = omega_index * n_count + n_index;
  if (n_index >= n_count || at >= cells.size()) throw Error(Errc::domain_error, "ensemble cell out of range");
  return cells[at];
}

QuenchedEnsemble run_quenched_mc(const QuenchedConfig& cfg) {
  cfg.validate();
  QuenchedEnsemble ens;
  ens.grid = cfg.grid;
  ens.degenerate = cfg.trials < 100;
  ens.n_count = cfg.n_list.size();
  const auto trials = static_cast<std::size_t>(cfg.trials);
  for (auto omega : cfg.omega_seeds) {
    for (std::size_t j = 0; j < cfg.n_list.size(); ++j) {
      EnsembleCell cell;
      cell.omega_seed = omega;
      cell.n_index = j;
      cell.n = cfg.n_list[j];
      cell.paths.resize(trials);
      parallel_for(trials, [&](std::size_t k) {
        const SeedContext ctx{omega, trial_seed_for(omega, j, k), cfg.master_salt};
        cell.paths[k] = centered_path(cfg.model, cfg.spec, ctx, cell.n, cfg.grid, cfg.mode);
      });
      cell.sigma2_empirical = mean_square(cell.terminal());
      ens.cells.push_back(std::move(cell));
    }
  }
  return ens;
}

PathSample brownian_sheet_sample(const Grid& grid, const Rect& n_cells, std::uint64_t seed) {
  const auto model = FieldModel::iid_diff(n_cells.dim());
  const SeedContext ctx{seed, seed, 0x7368656574ULL};
  return centered_path(model, InnovationSpec::gaussian(1.0), ctx, n_cells, grid);
}

std::vector<PathSample> brownian_sheet_samples(const Grid& grid, const Rect& n_cells, std::size_t count,
                                               std::uint64_t seed) {
  std::vector<PathSample> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = brownian_sheet_sample(grid, n_cells, derive_seed(seed, i)); });
  return out;
}

KsResult ks_marginal_test(const EnsembleCell& cell, double sigma2, std::size_t i, double alpha, bool centered) {
  if (!(sigma2 > 0.0)) throw Error(Errc::invalid_variance, "sigma2 must be positive");
  if (cell.paths.size() < 500) throw Error(Errc::domain_error, "ks_marginal_test needs at least 500 paths");
  if (cell.paths.empty() || i >= cell.paths.front().values.size())
    throw Error(Errc::domain_error, "grid index out of range");
  const auto x = cell.marginal(i, centered);
  const double var = sigma2 * grid_volume(cell.paths.front().grid, i);
  if (var == 0.0) {
    KsResult r;
    r.alpha = alpha;
    r.n = x.size();
    const auto nonzero = std::count_if(x.begin(), x.end(), [](double v) { return v != 0.0; });
    r.statistic = static_cast<double>(nonzero) / static_cast<double>(x.size());
    r.pass = nonzero == 0;
    r.p_value = r.pass ? 1.0 : 0.0;
    return r;
  }
  return ks_one_sample(x, [var](double v) { return normal_cdf(v, var); }, alpha);
}

std::vector<KsResult> ks_grid_test(const EnsembleCell& cell, double sigma2, double alpha) {
  if (cell.paths.empty()) throw Error(Errc::empty_input, "empty ensemble cell");
  const std::size_t m = cell.paths.front().values.size();
  std::vector<KsResult> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back(ks_marginal_test(cell, sigma2, i, alpha / static_cast<double>(m)));
  return out;
}

FddReport fdd_covariance_check(const EnsembleCell& cell, double sigma2, const Grid& grid) {
  if (cell.paths.size() < 500) throw Error(Errc::domain_error, "fdd_covariance_check needs at least 500 paths");
  if (grid.size() < 4) throw Error(Errc::domain_error, "fdd_covariance_check needs at least 4 grid points");
  if (!(sigma2 > 0.0)) throw Error(Errc::invalid_variance, "sigma2 must be positive");
  const auto& pg = cell.paths.front().grid;
  // Grid points are matched against the ensemble grid.
  std::vector<std::size_t> idx;
  for (const auto& p : grid.points) {
    auto it = std::find(pg.points.begin(), pg.points.end(), p);
    if (it == pg.points.end()) throw Error(Errc::domain_error, "grid point not in the ensemble grid");
    idx.push_back(static_cast<std::size_t>(it - pg.points.begin()));
  }
  std::vector<std::vector<double>> cols;
  for (auto i : idx) cols.push_back(cell.marginal(i));
  FddReport rep;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a; b < idx.size(); ++b) {
      double target = sigma2;
      for (int k = 0; k < grid.d; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        target *= std::min(grid.points[a][kk], grid.points[b][kk]);
      }
      if (target < 0.05 * sigma2) continue;
      CovarianceEntry e;
      e.s = idx[a];
      e.t = idx[b];
      e.target = target;
      e.empirical = sample_covariance(cols[a], cols[b]);
      e.rel_error = std::abs(e.empirical - target) / target;
      {
        const double ma = mean(cols[a]), mb = mean(cols[b]);
        std::vector<double> prod(cols[a].size());
        for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = (cols[a][i] - ma) * (cols[b][i] - mb);
        e.std_error = std::sqrt(sample_variance(prod) / static_cast<double>(prod.size()));
      }
      e.z = e.std_error > 0.0 ? (e.empirical - target) / e.std_error : 0.0;
      rep.max_rel_error = std::max(rep.max_rel_error, e.rel_error);
      rep.max_abs_z = std::max(rep.max_abs_z, std::abs(e.z));
      rep.entries.push_back(e);
    }
  return rep;
}

ComparisonReport quenched_vs_annealed(const QuenchedConfig& cfg, const QuenchedEnsemble& ens, std::size_t n_index,
                                      bool centered, double alpha) {
  if (cfg.omega_seeds.size() < 2) throw Error(Errc::domain_error, "quenched_vs_annealed needs two omega seeds");
  if (n_index >= cfg.n_list.size()) throw Error(Errc::domain_error, "n_index out of range");
  const Rect n = cfg.n_list[n_index];
  std::vector<std::vector<double>> samples;
  for (std::size_t o = 0; o < cfg.omega_seeds.size(); ++o) samples.push_back(ens.cell(o, n_index).terminal(centered));

  const auto trials = static_cast<std::size_t>(cfg.trials);
  std::vector<double> annealed(trials);
  parallel_for(trials, [&](std::size_t k) {
    const std::uint64_t omega = derive_seed(cfg.omega_seeds.front(), 0x616e6e65ULL, k);
    const SeedContext ctx{omega, trial_seed_for(omega, n_index, k), cfg.master_salt};
    const auto p = centered_path(cfg.model, cfg.spec, ctx, n, cfg.grid, cfg.mode);
    annealed[k] = centered ? p.terminal : p.terminal_uncentered;
  });

  ComparisonReport rep;
  rep.alpha = alpha;
  const std::size_t m = samples.size();
  const double per = alpha / static_cast<double>(m * (m - 1) / 2 + m);
  auto name = [&](std::size_t o) { return "omega:" + std::to_string(cfg.omega_seeds[o]); };
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) rep.pairs.push_back({name(a), name(b), ks_two_sample(samples[a], samples[b], per)});
  for (std::size_t a = 0; a < m; ++a) rep.pairs.push_back({name(a), "annealed", ks_two_sample(samples[a], annealed, per)});
  for (const auto& p : rep.pairs) rep.all_pass = rep.all_pass && p.result.pass;
  return rep;
}

}  // namespace qfclt
