#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/output.hpp"
#include "json.hpp"
#include "qfclt/error.hpp"
#include "qfclt/parallel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailed = 1;
constexpr int kExitConfigError = 2;

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qfclt::Error(qfclt::Errc::io_error, "cannot read config '" + path + "'");
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw qfclt::Error(qfclt::Errc::invalid_config, path + ": not valid JSON");
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = qfclt::cli;
  CLI::App app{"Quenched functional CLT simulation and verification for lattice random fields"};
  app.set_version_flag("--version", std::string(cli::kArtifactVersion));
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::vector<std::string> overrides;

  for (const auto& name : cli::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default: output_dir, then $QFCLT_OUT_DIR, then ./qfclt_out)");
    sub->add_option("--threads", threads, "worker threads (default: hardware concurrency)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed-override", overrides, "KEY=VALUE for a seed or salt field, repeatable");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  try {
    const auto cmd = cli::command_from_string(app.get_subcommands().front()->get_name());
    auto doc = load_json(config_path);
    for (const auto& o : overrides) cli::apply_seed_override(doc, o);
    const auto cfg = cli::parse_config(doc);

    std::string dir = out_dir;
    if (dir.empty() && cfg.output_dir) dir = *cfg.output_dir;
    if (dir.empty()) {
      const char* env = std::getenv("QFCLT_OUT_DIR");
      dir = env && *env ? env : "qfclt_out";
    }
    if (threads > 0) qfclt::set_max_threads(static_cast<unsigned>(threads));

    const auto result = cli::run_command(cmd, cfg, dir);
    cli::write_json(std::filesystem::path(dir) / "summary.json",
                    cli::make_summary(cmd, cfg, result, cli::utc_timestamp()));

    for (const auto& [name, ok] : result.verdicts) std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
    std::cout << "wrote " << (std::filesystem::path(dir) / "summary.json").string() << '\n';
    return result.all_pass() ? kExitOk : kExitVerificationFailed;
  } catch (const qfclt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
}
