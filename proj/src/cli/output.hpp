#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ksapprox::cli {

using Cell = std::variant<double, std::int64_t, std::string>;

/// A plot-ready table. Column sets are part of the output schema.
struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

/// 17 significant digits: enough to read every double back exactly.
std::string format_double(double v);

/// Writes <dir>/<name>.csv or <dir>/<name>.json (array of row objects).
std::filesystem::path write_table(const std::filesystem::path& dir, const Table& table, const std::string& format);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace ksapprox::cli
