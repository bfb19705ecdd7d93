#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace chainlab {

/// Shortest decimal form that round-trips the double exactly.
std::string format_double(double value);

/// Writes one header row then data rows, fixed column order.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> columns);

  CsvWriter& operator<<(double value);
  CsvWriter& operator<<(long long value);
  CsvWriter& operator<<(std::string_view value);
  /// Ends the current row; throws if the column count does not match the header.
  void end_row();

 private:
  void separator();

  std::ostream& out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

}  // namespace chainlab
