#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gcg {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace gcg
