#pragma once

#include <string>
#include <utility>
#include <vector>

namespace wptrx {

/// Shortest decimal form that round-trips to the same double (std::to_chars),
/// so repeat runs emit byte-identical files.
std::string format_double(double v);

struct CsvCell {
  std::string text;
  CsvCell(double v);
  CsvCell(long v);
  CsvCell(int v);
  CsvCell(std::string s);
  CsvCell(const char* s);
};

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<CsvCell>>& rows);

/// key = value report, one per line.
void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& kv);

}  // namespace wptrx
