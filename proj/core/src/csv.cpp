#include "shel/csv.hpp"

#include <charconv>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "shel/errors.hpp"

namespace shel {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  require(!traj.states.empty(), "write_trajectory_csv: empty trajectory");
  const std::size_t n = traj.states.front().size();
  os << 't';
  for (std::size_t j = 0; j < n; ++j) os << ",x_" << j;
  os << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    os << format_double(traj.time.node(k));
    for (double v : traj.states[k]) os << ',' << format_double(v);
    os << '\n';
  }
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  return os.str();
}

CsvTable read_csv(std::istream& is) {
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(
          start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      table.header = std::move(cells);
      first = false;
      continue;
    }
    require(cells.size() == table.header.size(),
            "read_csv: row width does not match the header");
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const char* begin = cells[i].c_str();
      char* end = nullptr;
      row[i] = std::strtod(begin, &end);
      require(end == begin + cells[i].size() && !cells[i].empty(),
              "read_csv: non-numeric cell '" + cells[i] + "'");
    }
    table.rows.push_back(std::move(row));
  }
  require(!table.header.empty(), "read_csv: missing header line");
  return table;
}

}  // namespace shel
