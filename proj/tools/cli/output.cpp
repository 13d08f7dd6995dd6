#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>

#include "qfclt/error.hpp"

namespace qfclt::cli {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(Errc::io_error, "write to '" + path.string() + "' failed");
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(open_out(path)), path_(path), columns_(header.size()) {
  for (const auto& h : header) cell(h);
  end_row();
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (pending_++ > 0) out_ << ',';
  if (s.find_first_of(",\"\n") != std::string::npos) {
    out_ << '"';
    for (char c : s) out_ << (c == '"' ? "\"\"" : std::string(1, c));
    out_ << '"';
  } else {
    out_ << s;
  }
  return *this;
}

CsvWriter& CsvWriter::cell(double x) { return cell(format_double(x)); }
CsvWriter& CsvWriter::cell(std::int64_t x) { return cell(std::to_string(x)); }
CsvWriter& CsvWriter::cell(std::uint64_t x) { return cell(std::to_string(x)); }
CsvWriter& CsvWriter::cell(bool b) { return cell(std::string(b ? "true" : "false")); }

void CsvWriter::end_row() {
  if (pending_ != columns_)
    throw Error(Errc::io_error, path_.string() + ": row has " + std::to_string(pending_) + " cells, expected " +
                                    std::to_string(columns_));
  out_ << '\n';
  pending_ = 0;
  if (!out_) throw Error(Errc::io_error, "write to '" + path_.string() + "' failed");
}

}  // namespace qfclt::cli
