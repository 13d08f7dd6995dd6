#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace qfclt::cli {

/// Comma-separated writer with LF line endings and round-trip number formatting.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(double x);
  CsvWriter& cell(std::int64_t x);
  CsvWriter& cell(std::uint64_t x);
  CsvWriter& cell(bool b);
  void end_row();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t columns_ = 0;
  std::size_t pending_ = 0;
};

std::string format_double(double x);
std::string utc_timestamp();
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace qfclt::cli
