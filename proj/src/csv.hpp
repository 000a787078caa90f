#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

// Minimal CSV time-series IO with a JSON schema sidecar per file.
namespace besim::detail {

struct Column {
  std::string name;
  std::string description;
};

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<Column> columns);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);
  void flush();

 private:
  std::filesystem::path path_;
  std::vector<Column> columns_;
  std::FILE* file_ = nullptr;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a column; throws a format error when absent.
  std::size_t col(const std::string& name) const;
  bool has(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace besim::detail
