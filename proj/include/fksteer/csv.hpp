#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace fks::csv {

// Numeric rows of a comma-separated file. Blank lines and lines starting with
// '#' are skipped; a first line that does not parse as numbers is treated as a
// header and dropped.
std::vector<std::vector<double>> read_numeric(const std::filesystem::path& path);

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

// Shortest text that reads back to the same double.
std::string format_double(double value);

// Appends rows to a file as they are produced.
class Writer {
 public:
  Writer() = default;
  Writer(const std::filesystem::path& path, std::string_view header);

  bool is_open() const { return out_.is_open(); }
  void row(const std::vector<std::string>& fields);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

}  // namespace fks::csv
