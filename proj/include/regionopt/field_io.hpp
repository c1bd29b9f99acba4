#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "regionopt/grid.hpp"

namespace regionopt {

/// Shortest-safe decimal with 17 significant digits; "nan"/"inf"/"-inf" for
/// non-finite values. Round-trips through std::strtod.
std::string format_real(double value);

/// Grid CSV: header `x1,x2,value`, one row per node in storage order
/// (i outer, j inner), 17 significant digits.
void write_field_csv(std::ostream& out, const ScalarField& field);
void write_field_csv(const std::filesystem::path& path, const ScalarField& field);

/// Reads a grid CSV written for `grid`. Rows may come in any order; node
/// positions are matched by rounding x * N. Throws std::invalid_argument on
/// malformed rows, off-grid coordinates, duplicates or missing nodes.
ScalarField read_field_csv(std::istream& in, const GridSpec& grid);
ScalarField read_field_csv(const std::filesystem::path& path, const GridSpec& grid);

/// One `field_k####.csv` per time level (k is the 1-based level) in `dir`.
void write_space_time_checkpoint(const std::filesystem::path& dir, const SpaceTimeField& field);

}  // namespace regionopt
