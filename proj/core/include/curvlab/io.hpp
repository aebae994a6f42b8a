#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "curvlab/spectral.hpp"
#include "curvlab/surface.hpp"

namespace curvlab {

// All emitted artifacts are byte-reproducible: doubles as 17-significant-digit
// decimals in CSV, JSON with sorted keys, no timestamps or absolute paths.

// %.17g rendering (shortest repr that round-trips any double).
std::string format_g17(double x);

// Rectangular CSV: header row, then one row per record; every cell already a
// string.  Cells produced by csv_cell() below for numerics.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string to_string() const;  // validates row widths
};

std::string csv_cell(double x);
std::string csv_cell(long long x);
std::string csv_cell(int x);
std::string csv_cell(bool x);

// Single-column-per-field vertex table: "vertex,<name0>,<name1>,..."
CsvTable field_table(const std::vector<std::string>& names,
                     const std::vector<const Eigen::VectorXd*>& columns);

// Provenance-stamped scalar: {"provenance": "...", "value": ...}.
nlohmann::json quantity_json(const Quantity& q);
nlohmann::json quantity_json(double value, Provenance provenance);

// File helpers (IoError on failure).  write_text refuses nothing and creates
// parent directories.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

// Manifest for one pipeline command: the command verb, the emitted files
// (sorted, relative to the output directory), and labels naming the checked
// guarantees so a reader can map artifacts to claims.
nlohmann::json make_manifest(const std::string& command, std::vector<std::string> artifacts,
                             std::vector<std::string> guarantees);

}  // namespace curvlab
