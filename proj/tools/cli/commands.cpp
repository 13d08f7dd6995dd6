#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "output.hpp"
#include "qfclt/conditions.hpp"
#include "qfclt/error.hpp"
#include "qfclt/orlicz.hpp"
#include "qfclt/quenched.hpp"
#include "qfclt/rosenthal.hpp"
#include "qfclt/sums.hpp"

namespace qfclt::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kOrliczBootstrap = 50;
constexpr std::size_t kLemmaSamples = 10000;

json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

std::string rect_label(const Rect& n) {
  std::string s;
  for (int k = 0; k < n.dim(); ++k) s += (k ? "x" : "") + std::to_string(n.upper()[k]);
  return s;
}

std::vector<Rect> rects(const RunConfig& cfg) {
  std::vector<Rect> out;
  for (const auto& n : cfg.n_list) out.emplace_back(n);
  return out;
}

json estimate_json(const NormEstimate& e) {
  return {{"value", num(e.value)}, {"std_error", num(e.std_error)}, {"samples_used", e.samples_used}};
}

json mean_json(const MeanEstimate& e) {
  return {{"value", num(e.value)}, {"std_error", num(e.std_error)}, {"trials", e.trials}};
}

json sigma_json(const SigmaReport& s) {
  json j = {{"sigma2", num(s.sigma2)}, {"d0", s.d0_description}};
  if (s.sigma2_limit) j["sigma2_limit"] = num(*s.sigma2_limit);
  return j;
}

QuenchedConfig quenched_config(const RunConfig& cfg) {
  QuenchedConfig q;
  q.model = cfg.model->build(cfg.d);
  q.spec = *cfg.innovation;
  q.omega_seeds = cfg.omega_seeds;
  q.n_list = rects(cfg);
  q.grid = Grid::product(cfg.d, cfg.grid_levels);
  q.trials = *cfg.trials;
  q.mode = cfg.mode;
  q.master_salt = cfg.master_salt;
  q.validate();
  return q;
}

void write_paths(const fs::path& path, const QuenchedEnsemble& ens, int d) {
  std::vector<std::string> header{"omega_seed", "n_index", "n", "trial", "trial_seed", "point"};
  for (int k = 1; k <= d; ++k) header.push_back("t" + std::to_string(k));
  header.insert(header.end(), {"centered", "uncentered"});
  CsvWriter csv(path, header);
  for (const auto& cell : ens.cells) {
    for (std::size_t tr = 0; tr < cell.paths.size(); ++tr) {
      const auto& p = cell.paths[tr];
      for (std::size_t i = 0; i < ens.grid.size(); ++i) {
        csv.cell(cell.omega_seed).cell(static_cast<std::uint64_t>(cell.n_index)).cell(rect_label(cell.n));
        csv.cell(static_cast<std::uint64_t>(tr)).cell(p.trial_seed).cell(static_cast<std::uint64_t>(i));
        for (int k = 0; k < d; ++k) csv.cell(ens.grid.points[i][static_cast<std::size_t>(k)]);
        csv.cell(p.values[i]).cell(p.uncentered[i]);
        csv.end_row();
      }
    }
  }
}

RunResult run_orlicz(const RunConfig& cfg, const fs::path& out) {
  RunResult r;
  const auto& spec = *cfg.innovation;
  const YoungFamily fam(cfg.d);
  const auto samples = innovation_samples(spec, cfg.orlicz.samples, *cfg.orlicz.seed, cfg.master_salt);

  const auto moment = orlicz_moment(spec, cfg.d, cfg.orlicz.samples, *cfg.orlicz.seed);
  LuxemburgOptions lo;
  lo.seed = derive_seed(*cfg.orlicz.seed, 0x6c75'78ULL);
  lo.bootstrap_resamples = kOrliczBootstrap;
  const auto norm = luxemburg_norm(fam, samples, YoungKind::Phi, lo);
  const std::size_t lemma_n = std::min(samples.size(), kLemmaSamples);
  const auto lemmas = check_young_lemmas(fam, std::span<const double>(samples.data(), lemma_n));

  json dy = json::array();
  for (std::size_t i = 0; i < moment.dyadic_sizes.size(); ++i)
    dy.push_back({{"n", moment.dyadic_sizes[i]}, {"mean_phi", num(moment.dyadic_means[i])}});
  r.results["orlicz_moment"] = {{"estimate", estimate_json(moment.estimate)},
                                {"dyadic", dy},
                                {"tail_index", num(moment.tail_index)},
                                {"divergence_suspected", moment.divergence_suspected},
                                {"has_orlicz_moment", spec.has_orlicz_moment(cfg.d)}};
  r.results["luxemburg_norm"] = estimate_json(norm);
  json checks = json::array();
  for (const auto& c : lemmas.checks)
    checks.push_back({{"name", c.name}, {"applicable", c.applicable}, {"holds", c.holds}, {"slack", num(c.slack)}});
  r.results["young_lemmas"] = {{"samples", lemma_n}, {"mean_phi", num(lemmas.mean_phi)}, {"norm_phi", num(lemmas.norm_phi)},
                               {"min_slack", num(lemmas.min_slack())}, {"checks", checks}};
  r.verdicts["young_lemmas"] = lemmas.all_hold();

  std::vector<std::string> header{"x", "phi", "psi", "f", "varphi", "phi_pow"};
  CsvWriter csv(out / "orlicz.csv", header);
  for (int i = 0; i <= 60; ++i) {
    const double x = std::pow(10.0, -3.0 + 0.1 * i);
    csv.cell(x).cell(fam.phi(x)).cell(fam.psi(x)).cell(fam.f(x)).cell(fam.varphi(x)).cell(fam.phi_pow(x));
    csv.end_row();
  }
  r.files.push_back("orlicz.csv");
  return r;
}

json ensemble_cells_json(const QuenchedEnsemble& ens, const SigmaReport& sigma) {
  json cells = json::array();
  for (const auto& c : ens.cells) {
    const double ratio = sigma.sigma2 > 0 ? c.sigma2_empirical.value / sigma.sigma2 : NAN;
    cells.push_back({{"omega_seed", c.omega_seed},
                     {"n_index", c.n_index},
                     {"n", rect_label(c.n)},
                     {"trials", c.paths.size()},
                     {"sigma2_empirical", mean_json(c.sigma2_empirical)},
                     {"variance_ratio", num(ratio)}});
  }
  return cells;
}

RunResult run_simulate(const RunConfig& cfg, const fs::path& out, bool quench) {
  RunResult r;
  const auto q = quenched_config(cfg);
  const auto sigma = sigma2_theoretical(q.model, q.spec);
  const auto ens = run_quenched_mc(q);
  r.results["model"] = q.model.name();
  r.results["innovation"] = q.spec.name();
  r.results["sigma2_theoretical"] = sigma_json(sigma);
  r.results["degenerate"] = ens.degenerate;
  json cells = ensemble_cells_json(ens, sigma);

  if (quench) {
    if (q.trials < 500) throw Error(Errc::invalid_config, "trials: quench verdicts need at least 500 trials");
    for (std::size_t ci = 0; ci < ens.cells.size(); ++ci) {
      const auto& c = ens.cells[ci];
      const std::string tag = "omega:" + std::to_string(c.omega_seed) + "/n:" + rect_label(c.n);
      json ks = json::array();
      bool ks_ok = true;
      if (sigma.sigma2 > 0) {
        const auto res = ks_grid_test(c, sigma.sigma2, cfg.quench.alpha);
        for (std::size_t i = 0; i < res.size(); ++i) {
          ks.push_back({{"point", i},
                        {"statistic", num(res[i].statistic)},
                        {"critical_value", num(res[i].critical_value)},
                        {"p_value", num(res[i].p_value)},
                        {"pass", res[i].pass}});
          ks_ok = ks_ok && res[i].pass;
        }
        const auto fdd = fdd_covariance_check(c, sigma.sigma2, ens.grid);
        json entries = json::array();
        for (const auto& e : fdd.entries)
          entries.push_back({{"s", e.s}, {"t", e.t}, {"empirical", num(e.empirical)},
                             {"target", num(e.target)}, {"rel_error", num(e.rel_error)},
                             {"std_error", num(e.std_error)}, {"z", num(e.z)}});
        cells[ci]["fdd"] = {{"max_rel_error", num(fdd.max_rel_error)}, {"max_abs_z", num(fdd.max_abs_z)},
                            {"tolerance", cfg.quench.fdd_tolerance}, {"entries", entries}};
        r.verdicts["fdd[" + tag + "]"] = fdd.max_rel_error <= cfg.quench.fdd_tolerance;
      } else {
        ks_ok = false;
        cells[ci]["note"] = "zero limiting variance";
      }
      cells[ci]["ks"] = ks;
      r.verdicts["ks[" + tag + "]"] = ks_ok;
    }
    if (cfg.quench.compare_annealed) {
      json cmp = json::array();
      for (std::size_t j = 0; j < q.n_list.size(); ++j) {
        const auto rep = quenched_vs_annealed(q, ens, j, true, cfg.quench.alpha);
        json pairs = json::array();
        for (const auto& p : rep.pairs)
          pairs.push_back({{"a", p.a}, {"b", p.b}, {"statistic", num(p.result.statistic)},
                           {"p_value", num(p.result.p_value)}, {"pass", p.result.pass}});
        cmp.push_back({{"n", rect_label(q.n_list[j])}, {"alpha", rep.alpha}, {"pairs", pairs}, {"all_pass", rep.all_pass}});
        r.verdicts["quenched_vs_annealed[n:" + rect_label(q.n_list[j]) + "]"] = rep.all_pass;
      }
      r.results["quenched_vs_annealed"] = cmp;
    }
  }
  r.results["cells"] = cells;
  if (!quench || cfg.quench.write_paths) {
    write_paths(out / "paths.csv", ens, cfg.d);
    r.files.push_back("paths.csv");
  }
  return r;
}

json series_json(const SeriesDiagnostic& s) {
  return {{"condition", to_string(s.which)},
          {"verdict", to_string(s.verdict)},
          {"tail_ratio", num(s.tail_ratio)},
          {"monte_carlo", s.monte_carlo},
          {"final_partial_sum", num(s.partial_sums.empty() ? 0.0 : s.partial_sums.back())},
          {"note", s.note}};
}

RunResult run_conditions(const RunConfig& cfg, const fs::path& out) {
  RunResult r;
  const auto model = cfg.model->build(cfg.d);
  const auto& spec = *cfg.innovation;
  ConditionOptions opts;
  opts.mc_samples = cfg.conditions.mc_samples;
  opts.seed = *cfg.conditions.seed;
  const bool explicit_list = !cfg.conditions.which.empty();
  const auto which = explicit_list ? cfg.conditions.which : all_conditions();

  CsvWriter csv(out / "conditions.csv",
                {"condition", "level", "partial_sum", "increment", "error_band", "verdict", "monte_carlo"});
  json series = json::array();
  json skipped = json::array();
  for (auto k : which) {
    SeriesDiagnostic s;
    try {
      s = check_condition(model, spec, k, cfg.conditions.K, opts);
    } catch (const Error& e) {
      if (e.code() != Errc::not_computable || explicit_list) throw;
      skipped.push_back({{"condition", to_string(k)}, {"reason", e.what()}});
      continue;
    }
    for (std::size_t l = 0; l < s.levels.size(); ++l) {
      csv.cell(to_string(k)).cell(s.levels[l]).cell(s.partial_sums[l]).cell(s.increments[l]);
      csv.cell(s.error_bands.empty() ? 0.0 : s.error_bands[l]).cell(to_string(s.verdict)).cell(s.monte_carlo);
      csv.end_row();
    }
    series.push_back(series_json(s));
  }
  r.files.push_back("conditions.csv");
  r.results["model"] = model.name();
  r.results["innovation"] = spec.name();
  r.results["K"] = cfg.conditions.K;
  r.results["series"] = series;
  r.results["skipped"] = skipped;

  if (model.kind() == ModelKind::Linear) {
    const auto imp = condition_implication_check(model, spec, cfg.conditions.K, opts);
    r.results["implication"] = {{"ratioPhi", to_string(imp.ratio_phi.verdict)},
                                {"hannanPhi", to_string(imp.hannan_phi.verdict)},
                                {"consistent", imp.consistent}};
    r.verdicts["implication_ratioPhi_to_hannanPhi"] = imp.consistent;

    json dom = json::array();
    for (const auto& lv : practical_dominance(model, cfg.conditions.K))
      dom.push_back({{"level", lv.level}, {"max_weight_ratio", num(lv.max_weight_ratio)},
                     {"weight_dominates", lv.weight_dominates}, {"terms_dominate", lv.terms_dominate}});
    r.results["practical_dominance"] = dom;
  }
  return r;
}

RunResult run_rosenthal(const RunConfig& cfg, const fs::path& out) {
  RunResult r;
  const auto reports = rosenthal_sweep(cfg.d, *cfg.innovation, rects(cfg), *cfg.trials, cfg.rosenthal.field,
                                       *cfg.rosenthal.seed);
  CsvWriter csv(out / "rosenthal.csv", {"n", "field", "trials", "lhs", "lhs_exact", "lhs_std_error", "m_norm",
                                        "m_norm_std_error", "m_norm_upper", "rhs", "slack_ratio", "phi_branch_only",
                                        "verdict"});
  json rows = json::array();
  for (const auto& rep : reports) {
    const auto label = rect_label(rep.n);
    csv.cell(label).cell(to_string(rep.field)).cell(static_cast<std::int64_t>(rep.trials)).cell(rep.lhs);
    csv.cell(rep.lhs_exact).cell(rep.lhs_std_error).cell(rep.m_norm.value).cell(rep.m_norm.std_error);
    csv.cell(rep.m_norm_upper).cell(rep.rhs).cell(rep.slack_ratio).cell(rep.phi_branch_only).cell(rep.verdict);
    csv.end_row();
    rows.push_back({{"n", label},
                    {"lhs", num(rep.lhs)},
                    {"lhs_exact", rep.lhs_exact},
                    {"m_norm", estimate_json(rep.m_norm)},
                    {"m_norm_upper", num(rep.m_norm_upper)},
                    {"rhs", num(rep.rhs)},
                    {"slack_ratio", num(rep.slack_ratio)},
                    {"flags", rep.flags},
                    {"verdict", rep.verdict}});
    r.verdicts["rosenthal[" + label + "]"] = rep.verdict;
  }
  const auto k = rosenthal_constants(cfg.d);
  r.results["constants"] = {{"C1", k.c1}, {"C2", k.c2}};
  r.results["field"] = to_string(cfg.rosenthal.field);
  r.results["innovation"] = cfg.innovation->name();
  r.results["reports"] = rows;
  r.files.push_back("rosenthal.csv");
  return r;
}

RunResult run_negligibility(const RunConfig& cfg, const fs::path& out) {
  RunResult r;
  const auto model = cfg.model->build(cfg.d);
  const auto omega = cfg.negligibility.omega_seed ? *cfg.negligibility.omega_seed : cfg.omega_seeds.front();
  const auto sweep = negligibility_sweep(model, *cfg.innovation, omega, cfg.negligibility.coordinate, rects(cfg),
                                         *cfg.trials, cfg.master_salt);
  CsvWriter csv(out / "negligibility.csv", {"n", "coordinate", "value", "std_error", "trials", "dyadic_sublattice"});
  json rows = json::array();
  for (const auto& e : sweep) {
    csv.cell(rect_label(e.n)).cell(static_cast<std::int64_t>(e.coordinate)).cell(e.estimate.value);
    csv.cell(e.estimate.std_error).cell(static_cast<std::uint64_t>(e.estimate.trials)).cell(e.dyadic_sublattice);
    csv.end_row();
    rows.push_back({{"n", rect_label(e.n)}, {"estimate", mean_json(e.estimate)}, {"dyadic_sublattice", e.dyadic_sublattice}});
  }
  r.results["model"] = model.name();
  r.results["omega_seed"] = omega;
  r.results["coordinate"] = cfg.negligibility.coordinate;
  r.results["sweep"] = rows;
  r.files.push_back("negligibility.csv");
  return r;
}

}  // namespace

bool RunResult::all_pass() const {
  for (const auto& [name, ok] : verdicts)
    if (!ok) return false;
  return true;
}

RunResult run_command(Command cmd, const RunConfig& cfg, const fs::path& out_dir) {
  require_for(cfg, cmd);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create output directory '" + out_dir.string() + "': " + ec.message());
  switch (cmd) {
    case Command::Orlicz: return run_orlicz(cfg, out_dir);
    case Command::Simulate: return run_simulate(cfg, out_dir, false);
    case Command::Quench: return run_simulate(cfg, out_dir, true);
    case Command::CheckConditions: return run_conditions(cfg, out_dir);
    case Command::VerifyRosenthal: return run_rosenthal(cfg, out_dir);
    case Command::Negligibility: return run_negligibility(cfg, out_dir);
  }
  throw Error(Errc::invalid_config, "unhandled command");
}

json make_summary(Command cmd, const RunConfig& cfg, const RunResult& r, const std::string& timestamp) {
  json files = r.files;
  files.push_back("summary.json");
  return {{"artifact", "qfclt"},
          {"version", kArtifactVersion},
          {"command", to_string(cmd)},
          {"config", to_json(cfg)},
          {"results", r.results},
          {"verdicts", r.verdicts},
          {"all_verdicts_pass", r.all_pass()},
          {"files", files},
          {"timestamp", timestamp}};
}

}  // namespace qfclt::cli
