#include "pbf/geometry.hpp"

#include "pbf/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace pbf {

LayerMask::LayerMask(int n1, int n2, bool fill) : n1_(n1), n2_(n2) {
    if (n1 < 1 || n2 < 1)
        throw ArgumentError("layer mask needs a positive extent");
    cells_.assign(static_cast<std::size_t>(n1) * n2, fill ? 1 : 0);
}

void LayerMask::set(int d1, int d2, bool value) {
    if (d1 < 1 || d1 > n1_ || d2 < 1 || d2 > n2_)
        throw RangeError("mask element outside grid");
    cells_[static_cast<std::size_t>(d1 - 1) + static_cast<std::size_t>(d2 - 1) * n1_] = value ? 1 : 0;
}

int LayerMask::count() const { return static_cast<int>(std::count(cells_.begin(), cells_.end(), 1)); }

PartGeometry::PartGeometry(std::vector<LayerMask> layers) : layers_(std::move(layers)) {
    if (layers_.empty())
        throw GeometryError("part has no layers");
    n1_ = layers_.front().n1();
    n2_ = layers_.front().n2();
    for (std::size_t b = 0; b < layers_.size(); ++b) {
        if (layers_[b].n1() != n1_ || layers_[b].n2() != n2_)
            throw GeometryError("layer " + std::to_string(b + 1) + " mask has a different grid size");
        if (layers_[b].empty())
            throw GeometryError("layer " + std::to_string(b + 1) + " mask is empty");
    }
}

const LayerMask& PartGeometry::layer(int b) const {
    if (b < 1 || b > layer_count())
        throw RangeError("build layer " + std::to_string(b) + " outside 1.." + std::to_string(layer_count()));
    return layers_[static_cast<std::size_t>(b - 1)];
}

bool PartGeometry::in_part(int b, int d1, int d2) const {
    if (b < 1 || b > layer_count())
        return false;
    return layers_[static_cast<std::size_t>(b - 1)](d1, d2);
}

BoundingBox PartGeometry::bounds() const {
    BoundingBox box{n1_ + 1, n2_ + 1, 0, 0};
    for (const auto& m : layers_)
        for (int d2 = 1; d2 <= n2_; ++d2)
            for (int d1 = 1; d1 <= n1_; ++d1)
                if (m(d1, d2)) {
                    box.lo1 = std::min(box.lo1, d1);
                    box.lo2 = std::min(box.lo2, d2);
                    box.hi1 = std::max(box.hi1, d1);
                    box.hi2 = std::max(box.hi2, d2);
                }
    return box;
}

PartGeometry make_rectangle(int n1, int n2, int layers, int margin) {
    if (n1 < 1 || n2 < 1 || layers < 1 || margin < 0)
        throw ArgumentError("rectangle needs positive extents and a nonnegative margin");
    LayerMask m(n1 + 2 * margin, n2 + 2 * margin);
    for (int d2 = 1; d2 <= n2; ++d2)
        for (int d1 = 1; d1 <= n1; ++d1)
            m.set(d1 + margin, d2 + margin, true);
    return PartGeometry(std::vector<LayerMask>(static_cast<std::size_t>(layers), m));
}

PartGeometry make_prism(int length_elems, int height_elems, double taper, int layers, int margin) {
    if (length_elems < 1 || height_elems < 1 || layers < 1 || margin < 0)
        throw ArgumentError("prism needs positive extents and a nonnegative margin");
    if (!(taper >= 0.0 && taper < 1.0))
        throw ArgumentError("prism taper must lie in [0, 1)");
    LayerMask m(length_elems + 2 * margin, height_elems + 2 * margin);
    for (int i = 0; i < length_elems; ++i) {
        const double frac = length_elems > 1 ? static_cast<double>(i) / (length_elems - 1) : 0.0;
        const int h = std::max(1, static_cast<int>(std::lround(height_elems * (1.0 - taper * frac))));
        for (int j = 0; j < h; ++j)
            m.set(i + 1 + margin, j + 1 + margin, true);
    }
    return PartGeometry(std::vector<LayerMask>(static_cast<std::size_t>(layers), m));
}

PartGeometry make_half_ellipsoid(double a, double b, double c, double dx, double dy, double dz, int margin) {
    if (!(a > 0 && b > 0 && c > 0 && dx > 0 && dy > 0 && dz > 0) || margin < 0)
        throw ArgumentError("half ellipsoid needs positive semi-axes and spacings");
    // footprint elements: centres at (i - (n-1)/2) * d
    const int e1 = std::max(1, static_cast<int>(std::floor(2.0 * a / dx)) + 1);
    const int e2 = std::max(1, static_cast<int>(std::floor(2.0 * b / dy)) + 1);
    const int n1 = e1 + 2 * margin;
    const int n2 = e2 + 2 * margin;
    std::vector<LayerMask> layers;
    for (int k = 1;; ++k) {
        const double z = (k - 0.5) * dz;
        if (z >= c)
            break;
        const double s = std::sqrt(1.0 - (z / c) * (z / c));
        LayerMask m(n1, n2);
        for (int j = 0; j < e2; ++j) {
            const double y = (j - 0.5 * (e2 - 1)) * dy;
            for (int i = 0; i < e1; ++i) {
                const double x = (i - 0.5 * (e1 - 1)) * dx;
                const double r = (x / (a * s)) * (x / (a * s)) + (y / (b * s)) * (y / (b * s));
                if (r <= 1.0)
                    m.set(i + 1 + margin, j + 1 + margin, true);
            }
        }
        if (m.empty())
            break;
        layers.push_back(std::move(m));
    }
    if (layers.empty())
        throw GeometryError("half ellipsoid is thinner than one layer");
    return PartGeometry(std::move(layers));
}

PartGeometry load_mask_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ArgumentError("cannot open mask file " + path.string());
    std::vector<std::vector<std::string>> blocks(1);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!line.empty() && line.front() == '%')
            continue;
        if (line.find_first_not_of(" \t") == std::string::npos) {
            if (!blocks.back().empty())
                blocks.emplace_back();
            continue;
        }
        for (char ch : line)
            if (ch != '0' && ch != '1' && ch != '#' && ch != '.')
                throw ParseError(lineno, "unexpected character '" + std::string(1, ch) + "' in mask file");
        blocks.back().push_back(line);
    }
    if (blocks.back().empty())
        blocks.pop_back();
    if (blocks.empty())
        throw GeometryError("mask file " + path.string() + " holds no layers");
    const int n2 = static_cast<int>(blocks.front().size());
    const int n1 = static_cast<int>(blocks.front().front().size());
    std::vector<LayerMask> layers;
    for (const auto& rows : blocks) {
        if (static_cast<int>(rows.size()) != n2)
            throw GeometryError("mask file layers differ in row count");
        LayerMask m(n1, n2);
        for (int j = 0; j < n2; ++j) {
            if (static_cast<int>(rows[j].size()) != n1)
                throw GeometryError("mask file rows differ in length");
            for (int i = 0; i < n1; ++i)
                m.set(i + 1, j + 1, rows[j][i] == '1' || rows[j][i] == '#');
        }
        layers.push_back(std::move(m));
    }
    return PartGeometry(std::move(layers));
}

} // namespace pbf
