#include "curvlab/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "curvlab/errors.hpp"

namespace curvlab {

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> row) {
  rows.push_back(std::move(row));
}

std::string CsvTable::to_string() const {
  std::ostringstream out;
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw PreconditionError("CsvTable: row width does not match header");
    }
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  return out.str();
}

std::string csv_cell(double x) { return format_g17(x); }
std::string csv_cell(long long x) { return std::to_string(x); }
std::string csv_cell(int x) { return std::to_string(x); }
std::string csv_cell(bool x) { return x ? "1" : "0"; }

CsvTable field_table(const std::vector<std::string>& names,
                     const std::vector<const Eigen::VectorXd*>& columns) {
  if (names.size() != columns.size() || columns.empty()) {
    throw PreconditionError("field_table: one name per column required");
  }
  const Eigen::Index n = columns.front()->size();
  for (const auto* c : columns) {
    if (c->size() != n) throw PreconditionError("field_table: column sizes differ");
  }
  CsvTable t;
  t.header.push_back("vertex");
  for (const auto& name : names) t.header.push_back(name);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::string> row;
    row.push_back(std::to_string(i));
    for (const auto* c : columns) row.push_back(csv_cell((*c)[i]));
    t.add_row(std::move(row));
  }
  return t;
}

nlohmann::json quantity_json(const Quantity& q) {
  return quantity_json(q.value, q.provenance);
}

nlohmann::json quantity_json(double value, Provenance provenance) {
  nlohmann::json j;
  j["value"] = value;
  j["provenance"] = provenance_name(provenance);
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

nlohmann::json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoError("invalid JSON: " + path);
  return j;
}

nlohmann::json make_manifest(const std::string& command, std::vector<std::string> artifacts,
                             std::vector<std::string> guarantees) {
  std::sort(artifacts.begin(), artifacts.end());
  std::sort(guarantees.begin(), guarantees.end());
  nlohmann::json j;
  j["command"] = command;
  j["artifacts"] = artifacts;
  j["guarantees"] = guarantees;
  return j;
}

}  // namespace curvlab
