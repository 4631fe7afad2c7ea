#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace lmem {

/// Build version, "<semver>-<git describe>".
std::string version_string();

/// Lossless 17-significant-digit scientific form ("%.16e").
std::string format_double(double x);

/// Small CSV table with string cells; numeric cells go through format_double.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(std::vector<std::string> cells);
  CsvTable& values(const std::vector<double>& values);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace lmem
