#include "pbf/io.hpp"

#include "pbf/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>

namespace pbf {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

PgmScale write_pgm(std::ostream& out, int width, int height, const std::vector<double>& values) {
    if (width < 1 || height < 1 || values.size() != static_cast<std::size_t>(width) * height)
        throw DimensionError("PGM size does not match the pixel count");
    PgmScale s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (double v : values)
        if (!std::isnan(v)) {
            s.min = std::min(s.min, v);
            s.max = std::max(s.max, v);
        }
    if (s.min > s.max)
        s = {0.0, 0.0};
    out << "P5\n" << width << ' ' << height << "\n255\n";
    const double span = s.max - s.min;
    std::vector<char> row(static_cast<std::size_t>(width));
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const double v = values[static_cast<std::size_t>(r) * width + c];
            int g = 0;
            if (!std::isnan(v) && span > 0.0)
                g = static_cast<int>(std::lround(255.0 * (v - s.min) / span));
            row[static_cast<std::size_t>(c)] = static_cast<char>(static_cast<unsigned char>(std::clamp(g, 0, 255)));
        }
        out.write(row.data(), width);
    }
    return s;
}

std::vector<unsigned char> read_pgm(std::istream& in, int& width, int& height) {
    std::string magic;
    int maxval = 0;
    if (!(in >> magic >> width >> height >> maxval) || magic != "P5" || maxval != 255 || width < 1 || height < 1)
        throw ParseError(0, "not an 8-bit P5 greymap");
    in.get();
    std::vector<unsigned char> px(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (in.gcount() != static_cast<std::streamsize>(px.size()))
        throw ParseError(0, "greymap pixel data is short");
    return px;
}

} // namespace pbf
