#include "gcg/cli/csv.hpp"

#include <fstream>
#include <sstream>

#include "gcg/errors.hpp"

namespace gcg {

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open csv: " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw ParseError("csv " + path.string() + ": missing header");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(cell.empty() ? 0.0 : std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("csv " + path.string() + " line " + std::to_string(line_no) +
                         ": not a number: '" + cell + "'");
      }
    }
    if (row.size() != t.header.size()) {
      throw ParseError("csv " + path.string() + " line " + std::to_string(line_no) +
                       ": column count mismatch");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace gcg
