#ifndef CSD_CSV_IO_HPP_
#define CSD_CSV_IO_HPP_

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>

#include "csd/types.hpp"

namespace csd {

// Data files carry a header row. Two-sample files need columns group, w and z
// with group Y or X; RDD files need only w and z. Other columns are ignored
// and blank lines are skipped. An observation's index is its 0-based position
// among the data rows, and error messages count the header as line 1.
struct ParsedData {
  Sample ysample;
  Sample xsample;
  Sample pooled;  // RDD files
  bool rdd = false;
  std::size_t rows = 0;
};

ParsedData parse_csv(std::istream& in, bool rdd);
ParsedData parse_csv_file(const std::string& path, bool rdd);

// Writes the rows back in their original order with 17 significant digits.
void write_csv(std::ostream& out, const ParsedData& data);

// Shortest-form-independent decimal rendering: %.17g.
std::string format_double(double v);

}  // namespace csd

#endif  // CSD_CSV_IO_HPP_
