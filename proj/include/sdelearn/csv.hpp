#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace sdelearn {

/// Shortest decimal form that round-trips a double (17 significant digits).
std::string fmt17(double x);

/// Line-oriented CSV writer: UTF-8, LF line endings, no quoting (fields in
/// this project never contain commas).
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
};

}  // namespace sdelearn
