#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace pbf {

/**
 * Finite-difference mesh over the layer window.
 *
 * n1 x n2 elements per layer, `layers` layers in the window (slot 1 is the
 * bottom, slot `layers` is the top layer currently being scanned). dz is the
 * powder layer thickness.
 */
struct MeshSpec {
    int n1 = 1;
    int n2 = 1;
    int layers = 1;
    double dx = 1.0;
    double dy = 1.0;
    double dz = 1.0;
    double dt = 1.0;

    void validate() const;

    std::size_t plane_size() const { return static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2); }
    std::size_t state_size() const { return plane_size() * static_cast<std::size_t>(layers); }

    /// 0-based storage offset of a 1-based element index; no range check.
    std::size_t offset(int d1, int d2, int d3) const {
        return static_cast<std::size_t>(d1 - 1) + static_cast<std::size_t>(d2 - 1) * n1 +
               static_cast<std::size_t>(d3 - 1) * plane_size();
    }
    /// Offset of element (d1,d2) in the top slot.
    std::size_t top_offset(int d1, int d2) const { return offset(d1, d2, layers); }

    bool contains(int d1, int d2, int d3) const {
        return d1 >= 1 && d1 <= n1 && d2 >= 1 && d2 <= n2 && d3 >= 1 && d3 <= layers;
    }
};

/// 1-based position in the flat state vector.
struct FlatIndex {
    std::size_t value = 1;
    friend bool operator==(FlatIndex, FlatIndex) = default;
};

struct MeshCoord {
    int d1 = 1;
    int d2 = 1;
    int d3 = 1;
    friend bool operator==(const MeshCoord&, const MeshCoord&) = default;
};

FlatIndex phi(int d1, int d2, int d3, const MeshSpec& spec);
MeshCoord phi_inv(FlatIndex index, const MeshSpec& spec);

/// Dense 3-D array with d1 varying fastest, indexed 1-based.
class Field3 {
  public:
    Field3() = default;
    Field3(int n1, int n2, int n3, double fill = 0.0);

    int n1() const { return n1_; }
    int n2() const { return n2_; }
    int n3() const { return n3_; }

    double& operator()(int d1, int d2, int d3);
    double operator()(int d1, int d2, int d3) const;

    const std::vector<double>& data() const { return data_; }

    friend bool operator==(const Field3&, const Field3&) = default;

  private:
    std::size_t index(int d1, int d2, int d3) const;

    int n1_ = 0;
    int n2_ = 0;
    int n3_ = 0;
    std::vector<double> data_;
};

Eigen::VectorXd vectorize(const Field3& field, const MeshSpec& spec);
Field3 devectorize(const Eigen::VectorXd& vec, const MeshSpec& spec);

/**
 * Coarse control-voxel lattice laid over the mesh.
 *
 * Voxel (1,1) starts at mesh element (origin1, origin2); each voxel spans
 * size1 x size2 elements. Voxel ids run x-fastest like mesh elements.
 */
struct VoxelGridSpec {
    int origin1 = 1;
    int origin2 = 1;
    int size1 = 1;
    int size2 = 1;
    int m1 = 1;
    int m2 = 1;

    void validate() const;
    int voxel_count() const { return m1 * m2; }

    /// Smallest lattice anchored at (lo1, lo2) that covers elements up to (hi1, hi2).
    static VoxelGridSpec covering(int lo1, int lo2, int hi1, int hi2, int size1, int size2);
};

struct VoxelCoord {
    int vx = 1;
    int vy = 1;
    friend bool operator==(const VoxelCoord&, const VoxelCoord&) = default;
};

int element_to_voxel(int d1, int d2, const VoxelGridSpec& vspec);
VoxelCoord voxel_coord(int voxel_id, const VoxelGridSpec& vspec);
int voxel_id(VoxelCoord c, const VoxelGridSpec& vspec);

} // namespace pbf
