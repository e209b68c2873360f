#include "eemc/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "eemc/errors.hpp"

namespace eemc {

std::string format_real(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view text) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InvalidArgument("not a number: '" + std::string(text) + "'");
  return v;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw InvalidArgument("no CSV column named '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      t.comments.push_back(line.substr(1));
      continue;
    }
    if (!have_header) {
      t.header = split(line);
      have_header = true;
    } else {
      t.rows.push_back(split(line));
      if (t.rows.back().size() != t.header.size())
        throw InvalidArgument("CSV row " + std::to_string(t.rows.size()) + " has " +
                              std::to_string(t.rows.back().size()) + " fields, expected " +
                              std::to_string(t.header.size()));
    }
  }
  return t;
}

void write_trajectory_csv(const Trajectory& trajectory, const std::string& digest,
                          std::ostream& out) {
  out << "# config_digest=" << digest << " sampler=" << trajectory.sampler
      << " seed=" << trajectory.seed << '\n';
  const Eigen::Index dim =
      trajectory.levels.empty() || trajectory.levels.front().states.empty()
          ? 0
          : trajectory.levels.front().states.front().size();
  out << "iteration,level";
  for (Eigen::Index j = 0; j < dim; ++j) out << ",x" << j + 1;
  out << ",branch,accepted\n";
  const std::size_t n = trajectory.iterations();
  for (std::size_t i = 0; i < n; ++i) {
    for (const LevelTrace& lt : trajectory.levels) {
      out << i + 1 << ',' << lt.level;
      for (Eigen::Index j = 0; j < dim; ++j) out << ',' << format_real(lt.states[i][j]);
      out << ',' << to_string(lt.branches[i]) << ',' << (lt.accepted[i] ? 1 : 0) << '\n';
    }
  }
}

}  // namespace eemc
