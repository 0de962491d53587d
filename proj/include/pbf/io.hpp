#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pbf {

/// Decimal with 17 significant digits, round-trip safe.
std::string format_number(double v);

struct PgmScale {
    double min = 0.0;
    double max = 0.0;
};

/**
 * Binary P5 greymap, 8-bit. values[r * width + c], row 0 is written first.
 * Entries map linearly from [min, max] onto 0..255; a flat image is all 0.
 * NaN entries are written as 0 and ignored when finding the range.
 */
PgmScale write_pgm(std::ostream& out, int width, int height, const std::vector<double>& values);

/// Reads back a P5 file written by write_pgm (no comments, maxval 255).
std::vector<unsigned char> read_pgm(std::istream& in, int& width, int& height);

} // namespace pbf
