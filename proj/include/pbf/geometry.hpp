#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace pbf {

/// In-part / out-of-part flags for one layer cross-section on the n1 x n2 grid.
class LayerMask {
  public:
    LayerMask() = default;
    LayerMask(int n1, int n2, bool fill = false);

    int n1() const { return n1_; }
    int n2() const { return n2_; }

    /// 1-based lookup; anything outside the grid counts as out-of-part.
    bool operator()(int d1, int d2) const {
        if (d1 < 1 || d1 > n1_ || d2 < 1 || d2 > n2_)
            return false;
        return cells_[static_cast<std::size_t>(d1 - 1) + static_cast<std::size_t>(d2 - 1) * n1_] != 0;
    }
    void set(int d1, int d2, bool value);

    int count() const;
    bool empty() const { return count() == 0; }

    friend bool operator==(const LayerMask&, const LayerMask&) = default;

  private:
    int n1_ = 0;
    int n2_ = 0;
    std::vector<std::uint8_t> cells_;
};

struct BoundingBox {
    int lo1 = 0;
    int lo2 = 0;
    int hi1 = -1;
    int hi2 = -1;
};

/// Per-layer cross-sections of the whole build. Build layers are numbered from 1.
class PartGeometry {
  public:
    PartGeometry() = default;
    explicit PartGeometry(std::vector<LayerMask> layers);

    int n1() const { return n1_; }
    int n2() const { return n2_; }
    int layer_count() const { return static_cast<int>(layers_.size()); }

    /// Mask of build layer b (1..layer_count()).
    const LayerMask& layer(int b) const;
    /// True when b is a real build layer and (d1,d2) is inside it.
    bool in_part(int b, int d1, int d2) const;

    /// Bounding box of in-part elements over all layers.
    BoundingBox bounds() const;

  private:
    int n1_ = 0;
    int n2_ = 0;
    std::vector<LayerMask> layers_;
};

/// Fully filled n1 x n2 block repeated over `layers` layers, surrounded by `margin` powder elements.
PartGeometry make_rectangle(int n1, int n2, int layers, int margin = 0);

/**
 * Trapezoidal prism. Columns along x keep full height `height_elems` at the
 * left end and shrink linearly to (1 - taper) of it at the right end; the
 * lower edge is straight, the upper edge slopes. Same cross-section on every
 * layer.
 */
PartGeometry make_prism(int length_elems, int height_elems, double taper, int layers, int margin);

/**
 * Half ellipsoid with semi-axes a (x), b (y), c (z) in metres. Layer b is cut
 * at z = (b - 1/2) dz; layers with an empty cut are not part of the build.
 */
PartGeometry make_half_ellipsoid(double a, double b, double c, double dx, double dy, double dz, int margin);

/**
 * Reads layer masks from a text file. Each layer is a block of rows, the
 * first row being d2 = 1; '1' or '#' is in-part, '0' or '.' is powder.
 * Layers are separated by blank lines; '%' starts a comment line.
 */
PartGeometry load_mask_file(const std::filesystem::path& path);

} // namespace pbf
