#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfclt/conditions.hpp"
#include "qfclt/fields.hpp"
#include "qfclt/innovations.hpp"
#include "qfclt/rosenthal.hpp"
#include "qfclt/sums.hpp"

namespace qfclt::cli {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum class Command { Orlicz, Simulate, Quench, CheckConditions, VerifyRosenthal, Negligibility };

std::string to_string(Command c);
Command command_from_string(const std::string& s);
std::vector<std::string> command_names();

struct ModelConfig {
  ModelKind kind = ModelKind::Linear;
  FamilyKind family = FamilyKind::Delta;
  double param = 0.0;
  int radius = 1;
  std::vector<LinearTerm> linear_terms;      // family explicit, linear
  std::vector<VolterraTerm> volterra_terms;  // family explicit, volterra

  FieldModel build(int d) const;
};

struct OrliczSection {
  std::size_t samples = 100000;
  std::optional<std::uint64_t> seed;
};

struct ConditionsSection {
  int K = 6;
  std::vector<ConditionKind> which;  // empty: every condition defined for the model
  std::size_t mc_samples = 4000;
  std::optional<std::uint64_t> seed;
};

struct RosenthalSection {
  DiffField field = DiffField::Iid;
  std::optional<std::uint64_t> seed;
};

struct NegligibilitySection {
  int coordinate = 1;
  std::optional<std::uint64_t> omega_seed;
};

struct QuenchSection {
  double alpha = 0.01;
  double fdd_tolerance = 0.10;
  bool compare_annealed = false;
  bool write_paths = true;
};

/// Parsed and schema-checked run configuration. Every random stream is
/// seeded from explicit fields.
struct RunConfig {
  int d = 0;
  std::optional<ModelConfig> model;
  std::optional<InnovationSpec> innovation;
  PathMode mode = PathMode::Rectangular;
  std::vector<MultiIndex> n_list;
  std::vector<double> grid_levels{0.25, 0.5, 0.75, 1.0};
  std::optional<int> trials;
  std::vector<std::uint64_t> omega_seeds;
  std::uint64_t master_salt = 0;
  std::optional<std::string> output_dir;
  OrliczSection orlicz;
  ConditionsSection conditions;
  RosenthalSection rosenthal;
  NegligibilitySection negligibility;
  QuenchSection quench;
};

/// Throws Error(invalid_config) with a path-qualified message.
RunConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);
/// Fields the command needs; throws Error(invalid_config) naming the first missing one.
void require_for(const RunConfig& c, Command cmd);

/// Sets a dotted key (e.g. "rosenthal.seed" or "omega_seeds") in the raw
/// document; the value is parsed as JSON. Only seed and salt keys are allowed.
void apply_seed_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace qfclt::cli
