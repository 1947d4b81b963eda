#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "shel/grid.hpp"

namespace shel {

/// Shortest decimal form of a double that parses back to the same bits.
std::string format_double(double v);

/// Writes a trajectory as CSV: header line `t,x_0,...,x_{n-1}`, then one
/// row per time node with round-trip float formatting and '\n' line ends.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
std::string trajectory_csv(const Trajectory& traj);

/// A parsed CSV table of doubles (header names kept verbatim).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Reads a table written by write_trajectory_csv (or anything shaped like
/// it): first line is the header, every other line is comma-separated
/// numbers. Ragged or non-numeric rows raise Error.
CsvTable read_csv(std::istream& is);

}  // namespace shel
