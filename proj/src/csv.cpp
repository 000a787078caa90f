#include "csv.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "besim/error.hpp"

namespace besim::detail {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<Column> columns)
    : path_(path), columns_(std::move(columns)) {
  file_ = std::fopen(path.string().c_str(), "wb");
  if (!file_) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  std::string header;
  for (const auto& c : columns_) header += (header.empty() ? "" : ",") + c.name;
  header += '\n';
  std::fputs(header.c_str(), file_);

  nlohmann::ordered_json schema;
  schema["file"] = path.filename().string();
  schema["format"] = "csv, header row, one sample per row, %.17g values";
  schema["columns"] = nlohmann::ordered_json::array();
  for (const auto& c : columns_)
    schema["columns"].push_back({{"name", c.name}, {"description", c.description}});
  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".schema.json");
  std::ofstream out(sidecar, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write schema " + sidecar.string());
  out << schema.dump(2) << '\n';
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(file_);
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_.size())
    throw Error(ErrorKind::input, "CSV row for " + path_.string() + " has the wrong column count");
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format_double(values[i]);
  }
  line += '\n';
  if (std::fputs(line.c_str(), file_) < 0) throw Error(ErrorKind::io, "failed writing " + path_.string());
}

void CsvWriter::flush() { std::fflush(file_); }

std::size_t CsvTable::col(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorKind::format, "CSV column '" + name + "' not found");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const std::size_t c = col(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::format, path.string() + ": missing header");
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw Error(ErrorKind::format, path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != t.header.size())
      throw Error(ErrorKind::format, path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace besim::detail
