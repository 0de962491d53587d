#include "pbf/grid.hpp"

#include "pbf/error.hpp"

#include <cmath>
#include <string>

namespace pbf {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

} // namespace

void MeshSpec::validate() const {
    if (n1 < 1 || n2 < 1 || layers < 1)
        throw ArgumentError("mesh needs n1, n2, layers >= 1 (got " + std::to_string(n1) + ", " +
                            std::to_string(n2) + ", " + std::to_string(layers) + ")");
    for (double v : {dx, dy, dz, dt}) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ArgumentError("mesh spacings and time step must be positive and finite");
    }
}

FlatIndex phi(int d1, int d2, int d3, const MeshSpec& spec) {
    if (!spec.contains(d1, d2, d3))
        throw RangeError("element (" + std::to_string(d1) + "," + std::to_string(d2) + "," +
                         std::to_string(d3) + ") outside " + std::to_string(spec.n1) + "x" +
                         std::to_string(spec.n2) + "x" + std::to_string(spec.layers) + " mesh");
    return FlatIndex{spec.offset(d1, d2, d3) + 1};
}

MeshCoord phi_inv(FlatIndex index, const MeshSpec& spec) {
    const std::size_t d = index.value;
    if (d < 1 || d > spec.state_size())
        throw RangeError("flat index " + std::to_string(d) + " outside 1.." + std::to_string(spec.state_size()));
    const std::size_t plane = spec.plane_size();
    const std::size_t d3 = ceil_div(d, plane);
    const std::size_t rem = d - (d3 - 1) * plane;
    const std::size_t d2 = ceil_div(rem, static_cast<std::size_t>(spec.n1));
    const std::size_t d1 = rem - (d2 - 1) * static_cast<std::size_t>(spec.n1);
    return MeshCoord{static_cast<int>(d1), static_cast<int>(d2), static_cast<int>(d3)};
}

Field3::Field3(int n1, int n2, int n3, double fill) : n1_(n1), n2_(n2), n3_(n3) {
    if (n1 < 0 || n2 < 0 || n3 < 0)
        throw DimensionError("negative field extent");
    data_.assign(static_cast<std::size_t>(n1) * n2 * n3, fill);
}

std::size_t Field3::index(int d1, int d2, int d3) const {
    if (d1 < 1 || d1 > n1_ || d2 < 1 || d2 > n2_ || d3 < 1 || d3 > n3_)
        throw RangeError("field index out of range");
    return static_cast<std::size_t>(d1 - 1) + static_cast<std::size_t>(d2 - 1) * n1_ +
           static_cast<std::size_t>(d3 - 1) * n1_ * n2_;
}

double& Field3::operator()(int d1, int d2, int d3) { return data_[index(d1, d2, d3)]; }
double Field3::operator()(int d1, int d2, int d3) const { return data_[index(d1, d2, d3)]; }

Eigen::VectorXd vectorize(const Field3& field, const MeshSpec& spec) {
    if (field.n1() != spec.n1 || field.n2() != spec.n2 || field.n3() != spec.layers)
        throw DimensionError("field shape does not match mesh");
    const auto& d = field.data();
    return Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
}

Field3 devectorize(const Eigen::VectorXd& vec, const MeshSpec& spec) {
    if (static_cast<std::size_t>(vec.size()) != spec.state_size())
        throw DimensionError("vector length " + std::to_string(vec.size()) + " does not match mesh size " +
                             std::to_string(spec.state_size()));
    Field3 out(spec.n1, spec.n2, spec.layers);
    for (int d3 = 1; d3 <= spec.layers; ++d3)
        for (int d2 = 1; d2 <= spec.n2; ++d2)
            for (int d1 = 1; d1 <= spec.n1; ++d1)
                out(d1, d2, d3) = vec[static_cast<Eigen::Index>(spec.offset(d1, d2, d3))];
    return out;
}

void VoxelGridSpec::validate() const {
    if (size1 < 1 || size2 < 1)
        throw ArgumentError("voxel size must be a positive number of elements");
    if (m1 < 1 || m2 < 1)
        throw ArgumentError("voxel grid must have at least one voxel per axis");
}

VoxelGridSpec VoxelGridSpec::covering(int lo1, int lo2, int hi1, int hi2, int size1, int size2) {
    if (hi1 < lo1 || hi2 < lo2)
        throw ArgumentError("empty voxel grid extent");
    VoxelGridSpec v;
    v.origin1 = lo1;
    v.origin2 = lo2;
    v.size1 = size1;
    v.size2 = size2;
    v.validate();
    v.m1 = (hi1 - lo1) / size1 + 1;
    v.m2 = (hi2 - lo2) / size2 + 1;
    return v;
}

int element_to_voxel(int d1, int d2, const VoxelGridSpec& vspec) {
    const int r1 = d1 - vspec.origin1;
    const int r2 = d2 - vspec.origin2;
    if (r1 < 0 || r2 < 0 || r1 / vspec.size1 >= vspec.m1 || r2 / vspec.size2 >= vspec.m2)
        throw RangeError("element (" + std::to_string(d1) + "," + std::to_string(d2) + ") outside voxel grid");
    return voxel_id(VoxelCoord{r1 / vspec.size1 + 1, r2 / vspec.size2 + 1}, vspec);
}

VoxelCoord voxel_coord(int id, const VoxelGridSpec& vspec) {
    if (id < 1 || id > vspec.voxel_count())
        throw RangeError("voxel id " + std::to_string(id) + " outside 1.." + std::to_string(vspec.voxel_count()));
    return VoxelCoord{(id - 1) % vspec.m1 + 1, (id - 1) / vspec.m1 + 1};
}

int voxel_id(VoxelCoord c, const VoxelGridSpec& vspec) {
    if (c.vx < 1 || c.vx > vspec.m1 || c.vy < 1 || c.vy > vspec.m2)
        throw RangeError("voxel coordinate outside grid");
    return c.vx + (c.vy - 1) * vspec.m1;
}

} // namespace pbf
