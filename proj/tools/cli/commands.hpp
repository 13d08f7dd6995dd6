#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"

namespace qfclt::cli {

struct RunResult {
  nlohmann::json results = nlohmann::json::object();
  std::map<std::string, bool> verdicts;
  std::vector<std::string> files;  // relative to the output directory

  bool all_pass() const;
};

RunResult run_command(Command cmd, const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Full summary document; keys are emitted in sorted order.
nlohmann::json make_summary(Command cmd, const RunConfig& cfg, const RunResult& r, const std::string& timestamp);

}  // namespace qfclt::cli
