#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "doctest.h"
#include "qfclt/error.hpp"

using namespace qfclt;
using namespace qfclt::cli;
using nlohmann::json;

namespace {

json quench_doc() {
  return json::parse(R"({
    "d": 2,
    "model": {"type": "linear", "family": "geometric", "param": 0.5, "radius": 3},
    "innovation": {"dist": "gaussian", "param": 1.0},
    "n_list": [[4, 4], [8, 8]],
    "trials": 120,
    "omega_seeds": [1, 2],
    "master_salt": 9
  })");
}

Errc config_error(const json& j) {
  try {
    parse_config(j);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::io_error;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config echo round-trips") {
  const auto c = parse_config(quench_doc());
  const auto echo = to_json(c);
  CHECK(to_json(parse_config(echo)) == echo);
  CHECK(echo["model"]["radius"] == 3);
  CHECK(echo["mode"] == "rectangular");

  auto explicit_doc = quench_doc();
  explicit_doc["model"] = json::parse(R"({"type": "volterra", "family": "explicit",
      "terms": [{"u": [0, 0], "v": [1, 0], "a": 0.5}, {"u": [0, 1], "v": [2, 1], "a": -0.25}]})");
  const auto echo2 = to_json(parse_config(explicit_doc));
  CHECK(to_json(parse_config(echo2)) == echo2);
  CHECK(echo2["model"]["terms"].size() == 2);
}

TEST_CASE("schema errors name the field") {
  auto j = quench_doc();
  j["colour"] = 1;
  CHECK(config_error(j) == Errc::invalid_config);

  j = quench_doc();
  j["n_list"] = json::parse("[[4, 4, 4]]");
  CHECK(config_error(j) == Errc::invalid_config);

  j = quench_doc();
  j["model"]["family"] = "cauchy";
  CHECK(config_error(j) == Errc::invalid_config);

  j = quench_doc();
  j["innovation"]["param"] = -1.0;
  CHECK(config_error(j) == Errc::invalid_config);

  j = quench_doc();
  j["omega_seeds"] = json::parse("[-3]");
  CHECK(config_error(j) == Errc::invalid_config);

  j = quench_doc();
  j.erase("trials");
  const auto c = parse_config(j);
  try {
    require_for(c, Command::Quench);
    FAIL("expected a missing-field error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_config);
    CHECK(std::string(e.what()).find("trials") != std::string::npos);
  }
  CHECK_NOTHROW(require_for(parse_config(quench_doc()), Command::Simulate));
  CHECK_THROWS_AS(require_for(parse_config(quench_doc()), Command::VerifyRosenthal), Error);
}

TEST_CASE("seed overrides touch only seed fields") {
  auto j = quench_doc();
  apply_seed_override(j, "omega_seeds=[7,8,9]");
  apply_seed_override(j, "rosenthal.seed=42");
  CHECK(j["omega_seeds"].size() == 3);
  CHECK(j["rosenthal"]["seed"] == 42);
  CHECK_THROWS_AS(apply_seed_override(j, "trials=5"), Error);
  CHECK_THROWS_AS(apply_seed_override(j, "master_salt"), Error);
  CHECK_THROWS_AS(apply_seed_override(j, "master_salt={"), Error);
}

TEST_CASE("simulate output is reproducible") {
  const auto c = parse_config(quench_doc());
  const auto base = std::filesystem::temp_directory_path() / "qfclt_unit_cli";
  std::filesystem::remove_all(base);
  const auto r1 = run_command(Command::Simulate, c, base / "a");
  const auto r2 = run_command(Command::Simulate, c, base / "b");
  CHECK(make_summary(Command::Simulate, c, r1, "t") == make_summary(Command::Simulate, c, r2, "t"));
  const auto csv = read_file(base / "a" / "paths.csv");
  CHECK(csv == read_file(base / "b" / "paths.csv"));
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv.rfind("omega_seed,n_index,n,trial,trial_seed,point,t1,t2,centered,uncentered\n", 0) == 0);
  // 2 omegas x 2 sizes x 120 trials x 16 grid points, plus the header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 * 2 * 120 * 16 + 1);
  std::filesystem::remove_all(base);
}
