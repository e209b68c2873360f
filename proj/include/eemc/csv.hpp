#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "eemc/ladder.hpp"

namespace eemc {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_real(double v);
double parse_real(std::string_view text);

struct CsvTable {
  std::vector<std::string> comments;  // lines starting with '#', without the marker
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

/// Reads a simple comma-separated file (no quoting).
CsvTable read_csv(std::istream& in);

/// Columns: iteration, level, x1..xd, branch, accepted. Rows are ordered by
/// iteration, then level. `digest` is written as a leading comment line.
void write_trajectory_csv(const Trajectory& trajectory, const std::string& digest,
                          std::ostream& out);

}  // namespace eemc
