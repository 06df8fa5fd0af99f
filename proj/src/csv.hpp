#pragma once

// Minimal CSV reading shared by the file-format readers. Not installed.

#include <string>
#include <string_view>
#include <vector>

namespace cmrls::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Index of a header column or -1.
  int column(std::string_view name) const;
};

// Parses a numeric CSV with a single header line; blank lines and lines starting
// with '#' are skipped. Throws IoError with the offending line number.
Table read(const std::string& path);

// Shortest round-trip formatting of a double.
std::string format(double x);

}  // namespace cmrls::csv
