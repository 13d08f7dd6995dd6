#include "config.hpp"

#include <set>

#include "qfclt/error.hpp"

namespace qfclt::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(Errc::invalid_config, path + ": " + what);
}

/// Object reader: typed access by key, with unknown-key detection.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(sub(key), "missing required field");
    return j_.at(key);
  }
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(sub(it.key()), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::int64_t as_int(const json& j, const std::string& path, std::int64_t lo, std::int64_t hi) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(hi)) fail(path, "out of range");
  const auto v = j.get<std::int64_t>();
  if (v < lo || v > hi) fail(path, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

std::uint64_t as_seed(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    fail(path, "expected a non-negative integer seed");
  return j.get<std::uint64_t>();
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

MultiIndex as_index(const json& j, const std::string& path, int d, std::int64_t lo) {
  as_array(j, path);
  if (static_cast<int>(j.size()) != d) fail(path, "expected " + std::to_string(d) + " coordinates");
  MultiIndex m(d);
  for (int k = 0; k < d; ++k)
    m[k] = as_int(j[static_cast<std::size_t>(k)], path + "[" + std::to_string(k) + "]", lo, 1 << 30);
  return m;
}

json index_json(const MultiIndex& m) {
  json a = json::array();
  for (auto c : m.coords()) a.push_back(c);
  return a;
}

template <class F>
auto convert(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

ModelConfig parse_model(const json& j, int d) {
  Obj o(j, "model");
  ModelConfig m;
  const auto type = as_string(o.at("type"), "model.type");
  if (type == "linear") m.kind = ModelKind::Linear;
  else if (type == "volterra") m.kind = ModelKind::Volterra;
  else if (type == "iid_diff") m.kind = ModelKind::IidDiff;
  else fail("model.type", "must be linear, volterra or iid_diff");

  if (m.kind != ModelKind::IidDiff) {
    const auto fam = as_string(o.at("family"), "model.family");
    if (fam == "delta") m.family = FamilyKind::Delta;
    else if (fam == "geometric") m.family = FamilyKind::Geometric;
    else if (fam == "polynomial") m.family = FamilyKind::Polynomial;
    else if (fam == "explicit") m.family = FamilyKind::Explicit;
    else fail("model.family", "must be delta, geometric, polynomial or explicit");

    if (m.family == FamilyKind::Geometric || m.family == FamilyKind::Polynomial)
      m.param = as_double(o.at("param"), "model.param");
    if (m.family == FamilyKind::Explicit) {
      const auto& terms = as_array(o.at("terms"), "model.terms");
      if (terms.empty()) fail("model.terms", "must not be empty");
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string p = "model.terms[" + std::to_string(i) + "]";
        Obj t(terms[i], p);
        const double a = as_double(t.at("a"), p + ".a");
        if (m.kind == ModelKind::Linear) {
          m.linear_terms.push_back({as_index(t.at("lag"), p + ".lag", d, 0), a});
        } else {
          auto u = as_index(t.at("u"), p + ".u", d, 0);
          auto v = as_index(t.at("v"), p + ".v", d, 0);
          m.volterra_terms.push_back({u, v, a});
        }
        t.finish();
      }
    } else {
      m.radius = static_cast<int>(as_int(o.at("radius"), "model.radius", 0, 4096));
    }
  }
  o.finish();
  return m;
}

json model_json(const ModelConfig& m) {
  json j;
  j["type"] = to_string(m.kind);
  if (m.kind == ModelKind::IidDiff) return j;
  j["family"] = to_string(m.family);
  if (m.family == FamilyKind::Geometric || m.family == FamilyKind::Polynomial) j["param"] = m.param;
  if (m.family == FamilyKind::Explicit) {
    json terms = json::array();
    for (const auto& t : m.linear_terms) terms.push_back({{"lag", index_json(t.lag)}, {"a", t.a}});
    for (const auto& t : m.volterra_terms)
      terms.push_back({{"u", index_json(t.u)}, {"v", index_json(t.v)}, {"a", t.a}});
    j["terms"] = terms;
  } else {
    j["radius"] = m.radius;
  }
  return j;
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::Orlicz: return "orlicz";
    case Command::Simulate: return "simulate";
    case Command::Quench: return "quench";
    case Command::CheckConditions: return "check-conditions";
    case Command::VerifyRosenthal: return "verify-rosenthal";
    case Command::Negligibility: return "negligibility";
  }
  return "?";
}

std::vector<std::string> command_names() {
  return {"orlicz", "simulate", "quench", "check-conditions", "verify-rosenthal", "negligibility"};
}

Command command_from_string(const std::string& s) {
  for (auto c : {Command::Orlicz, Command::Simulate, Command::Quench, Command::CheckConditions,
                 Command::VerifyRosenthal, Command::Negligibility})
    if (to_string(c) == s) return c;
  throw Error(Errc::invalid_config, "unknown command '" + s + "'");
}

FieldModel ModelConfig::build(int d) const {
  if (kind == ModelKind::IidDiff) return FieldModel::iid_diff(d);
  CoefficientFamily fam;
  switch (family) {
    case FamilyKind::Delta: fam = CoefficientFamily::delta(); break;
    case FamilyKind::Geometric: fam = CoefficientFamily::geometric(param); break;
    case FamilyKind::Polynomial: fam = CoefficientFamily::polynomial(param); break;
    case FamilyKind::Explicit: {
      if (kind == ModelKind::Volterra) return FieldModel::volterra_explicit(d, volterra_terms);
      std::vector<std::pair<MultiIndex, double>> t;
      int r = 0;
      for (const auto& lt : linear_terms) {
        t.emplace_back(lt.lag, lt.a);
        for (auto c : lt.lag.coords()) r = std::max(r, static_cast<int>(c));
      }
      return FieldModel::linear(d, CoefficientFamily::explicit_list(std::move(t)), r);
    }
  }
  return kind == ModelKind::Linear ? FieldModel::linear(d, fam, radius) : FieldModel::volterra(d, fam, radius);
}

RunConfig parse_config(const json& j) {
  Obj o(j, "");
  RunConfig c;
  c.d = static_cast<int>(as_int(o.at("d"), "d", 1, kMaxDim));
  if (o.has("model")) {
    c.model = parse_model(j.at("model"), c.d);
    convert("model", [&] { return c.model->build(c.d); });
  }
  if (o.has("innovation")) {
    Obj in(j.at("innovation"), "innovation");
    InnovationSpec s;
    const auto dist = as_string(in.at("dist"), "innovation.dist");
    s.dist = convert("innovation.dist", [&] { return distribution_from_string(dist); });
    if (s.dist != Distribution::Rademacher) s.param = as_double(in.at("param"), "innovation.param");
    else if (in.has("param")) s.param = as_double(j.at("innovation").at("param"), "innovation.param");
    in.finish();
    convert("innovation", [&] {
      s.validate();
      return 0;
    });
    c.innovation = s;
  }
  if (o.has("mode")) {
    const auto mode = as_string(j.at("mode"), "mode");
    c.mode = convert("mode", [&] { return path_mode_from_string(mode); });
  }
  if (o.has("n_list")) {
    const auto& a = as_array(j.at("n_list"), "n_list");
    for (std::size_t i = 0; i < a.size(); ++i)
      c.n_list.push_back(as_index(a[i], "n_list[" + std::to_string(i) + "]", c.d, 1));
  }
  if (o.has("grid")) {
    const auto& a = as_array(j.at("grid"), "grid");
    c.grid_levels.clear();
    for (std::size_t i = 0; i < a.size(); ++i) c.grid_levels.push_back(as_double(a[i], "grid[" + std::to_string(i) + "]"));
    convert("grid", [&] {
      Grid::product(c.d, c.grid_levels).validate();
      return 0;
    });
  }
  if (o.has("trials")) c.trials = static_cast<int>(as_int(j.at("trials"), "trials", 1, 100000000));
  if (o.has("omega_seeds")) {
    const auto& a = as_array(j.at("omega_seeds"), "omega_seeds");
    for (std::size_t i = 0; i < a.size(); ++i)
      c.omega_seeds.push_back(as_seed(a[i], "omega_seeds[" + std::to_string(i) + "]"));
  }
  if (o.has("master_salt")) c.master_salt = as_seed(j.at("master_salt"), "master_salt");
  if (o.has("output_dir")) c.output_dir = as_string(j.at("output_dir"), "output_dir");

  if (o.has("orlicz")) {
    Obj s(j.at("orlicz"), "orlicz");
    if (s.has("samples")) c.orlicz.samples = static_cast<std::size_t>(as_int(j["orlicz"]["samples"], "orlicz.samples", 2, 100000000));
    if (s.has("seed")) c.orlicz.seed = as_seed(j["orlicz"]["seed"], "orlicz.seed");
    s.finish();
  }
  if (o.has("conditions")) {
    const auto& cj = j.at("conditions");
    Obj s(cj, "conditions");
    if (s.has("K")) c.conditions.K = static_cast<int>(as_int(cj["K"], "conditions.K", 1, 40));
    if (s.has("which")) {
      const auto& a = as_array(cj["which"], "conditions.which");
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string p = "conditions.which[" + std::to_string(i) + "]";
        const auto name = as_string(a[i], p);
        c.conditions.which.push_back(convert(p, [&] { return condition_from_string(name); }));
      }
    }
    if (s.has("mc_samples"))
      c.conditions.mc_samples = static_cast<std::size_t>(as_int(cj["mc_samples"], "conditions.mc_samples", 100, 100000000));
    if (s.has("seed")) c.conditions.seed = as_seed(cj["seed"], "conditions.seed");
    s.finish();
  }
  if (o.has("rosenthal")) {
    const auto& rj = j.at("rosenthal");
    Obj s(rj, "rosenthal");
    if (s.has("field")) {
      const auto f = as_string(rj["field"], "rosenthal.field");
      c.rosenthal.field = convert("rosenthal.field", [&] { return diff_field_from_string(f); });
    }
    if (s.has("seed")) c.rosenthal.seed = as_seed(rj["seed"], "rosenthal.seed");
    s.finish();
  }
  if (o.has("negligibility")) {
    const auto& nj = j.at("negligibility");
    Obj s(nj, "negligibility");
    if (s.has("coordinate")) c.negligibility.coordinate = static_cast<int>(as_int(nj["coordinate"], "negligibility.coordinate", 1, c.d));
    if (s.has("omega_seed")) c.negligibility.omega_seed = as_seed(nj["omega_seed"], "negligibility.omega_seed");
    s.finish();
  }
  if (o.has("quench")) {
    const auto& qj = j.at("quench");
    Obj s(qj, "quench");
    if (s.has("alpha")) c.quench.alpha = as_double(qj["alpha"], "quench.alpha");
    if (!(c.quench.alpha > 0.0 && c.quench.alpha < 1.0)) fail("quench.alpha", "must be in (0, 1)");
    if (s.has("fdd_tolerance")) c.quench.fdd_tolerance = as_double(qj["fdd_tolerance"], "quench.fdd_tolerance");
    if (!(c.quench.fdd_tolerance > 0.0)) fail("quench.fdd_tolerance", "must be positive");
    if (s.has("compare_annealed")) c.quench.compare_annealed = as_bool(qj["compare_annealed"], "quench.compare_annealed");
    if (s.has("write_paths")) c.quench.write_paths = as_bool(qj["write_paths"], "quench.write_paths");
    s.finish();
  }
  o.finish();
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["d"] = c.d;
  if (c.model) j["model"] = model_json(*c.model);
  if (c.innovation) j["innovation"] = {{"dist", to_string(c.innovation->dist)}, {"param", c.innovation->param}};
  j["mode"] = to_string(c.mode);
  json nl = json::array();
  for (const auto& n : c.n_list) nl.push_back(index_json(n));
  j["n_list"] = nl;
  j["grid"] = c.grid_levels;
  if (c.trials) j["trials"] = *c.trials;
  j["omega_seeds"] = c.omega_seeds;
  j["master_salt"] = c.master_salt;
  if (c.output_dir) j["output_dir"] = *c.output_dir;

  json orl = {{"samples", c.orlicz.samples}};
  if (c.orlicz.seed) orl["seed"] = *c.orlicz.seed;
  j["orlicz"] = orl;

  json cond = {{"K", c.conditions.K}, {"mc_samples", c.conditions.mc_samples}};
  json which = json::array();
  for (auto k : c.conditions.which) which.push_back(to_string(k));
  cond["which"] = which;
  if (c.conditions.seed) cond["seed"] = *c.conditions.seed;
  j["conditions"] = cond;

  json ros = {{"field", to_string(c.rosenthal.field)}};
  if (c.rosenthal.seed) ros["seed"] = *c.rosenthal.seed;
  j["rosenthal"] = ros;

  json neg = {{"coordinate", c.negligibility.coordinate}};
  if (c.negligibility.omega_seed) neg["omega_seed"] = *c.negligibility.omega_seed;
  j["negligibility"] = neg;

  j["quench"] = {{"alpha", c.quench.alpha},
                 {"fdd_tolerance", c.quench.fdd_tolerance},
                 {"compare_annealed", c.quench.compare_annealed},
                 {"write_paths", c.quench.write_paths}};
  return j;
}

void require_for(const RunConfig& c, Command cmd) {
  auto need = [](bool ok, const std::string& field) {
    if (!ok) fail(field, "missing required field for this command");
  };
  switch (cmd) {
    case Command::Orlicz:
      need(c.innovation.has_value(), "innovation");
      need(c.orlicz.seed.has_value(), "orlicz.seed");
      break;
    case Command::Simulate:
    case Command::Quench:
      need(c.model.has_value(), "model");
      need(c.innovation.has_value(), "innovation");
      need(!c.n_list.empty(), "n_list");
      need(c.trials.has_value(), "trials");
      need(!c.omega_seeds.empty(), "omega_seeds");
      break;
    case Command::CheckConditions:
      need(c.model.has_value(), "model");
      need(c.innovation.has_value(), "innovation");
      need(c.conditions.seed.has_value(), "conditions.seed");
      break;
    case Command::VerifyRosenthal:
      need(c.innovation.has_value(), "innovation");
      need(!c.n_list.empty(), "n_list");
      need(c.trials.has_value(), "trials");
      need(c.rosenthal.seed.has_value(), "rosenthal.seed");
      break;
    case Command::Negligibility:
      need(c.model.has_value(), "model");
      need(c.innovation.has_value(), "innovation");
      need(!c.n_list.empty(), "n_list");
      need(c.trials.has_value(), "trials");
      need(c.negligibility.omega_seed.has_value() || !c.omega_seeds.empty(), "negligibility.omega_seed");
      break;
  }
}

void apply_seed_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail("--seed-override", "expected KEY=VALUE, got '" + assignment + "'");
  const auto key = assignment.substr(0, eq);
  const auto raw = assignment.substr(eq + 1);
  const auto leaf = key.substr(key.rfind('.') == std::string::npos ? 0 : key.rfind('.') + 1);
  if (leaf.find("seed") == std::string::npos && leaf.find("salt") == std::string::npos)
    fail("--seed-override", "'" + key + "' is not a seed or salt field");
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) fail("--seed-override", "value for '" + key + "' is not valid JSON");
  if (!doc.is_object()) fail("--seed-override", "configuration is not an object");
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    json& next = (*node)[part];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) fail("--seed-override", "'" + key.substr(0, dot) + "' is not an object");
    node = &next;
    start = dot + 1;
  }
}

}  // namespace qfclt::cli
