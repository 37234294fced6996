#pragma once

#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace alvar::harness {

/// Headered CSV writer. Doubles are written with round-trip precision, NaN as
/// "nan", so identical inputs give byte-identical files.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(bool v) { return cell(static_cast<long long>(v ? 1 : 0)); }
  CsvWriter& cell(const std::string& v);
  void end_row();

 private:
  void separator();
  std::ofstream out_;
  std::string path_;
  bool row_started_ = false;
};

std::string format_double(double v);

/// Read one numeric column (the first) from a headered CSV file.
std::vector<double> read_column_csv(const std::string& path);

/// Read a 0/1 schedule from a headered CSV file.
std::vector<bool> read_schedule_csv(const std::string& path);

void write_column_csv(const std::string& path, const std::string& header,
                      const std::vector<double>& values);

void write_json(const std::string& path, const nlohmann::json& doc);

void ensure_directory(const std::string& path);

}  // namespace alvar::harness
