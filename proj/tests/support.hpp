#pragma once

#include "pbf/geometry.hpp"
#include "pbf/grid.hpp"
#include "pbf/path.hpp"
#include "pbf/thermal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace testing {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline double uniform_real(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Samples 0..n_t spread over n_s voxels (ids 1..n_s), each voxel holding at least one of 1..n_t.
inline pbf::SampleSets random_partition(int n_t, int n_s, Rng& rng) {
    std::vector<int> order(static_cast<std::size_t>(n_t));
    std::iota(order.begin(), order.end(), 1);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> owner(static_cast<std::size_t>(n_t) + 1);
    owner[0] = uniform_int(rng, 0, n_s - 1);
    for (int i = 0; i < n_t; ++i)
        owner[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i < n_s ? i : uniform_int(rng, 0, n_s - 1);
    pbf::SampleSets s;
    s.n_t = n_t;
    s.samples.resize(static_cast<std::size_t>(n_s));
    for (int v = 0; v < n_s; ++v)
        s.voxel_ids.push_back(v + 1);
    for (int n = 0; n <= n_t; ++n)
        s.samples[static_cast<std::size_t>(owner[static_cast<std::size_t>(n)])].push_back(n);
    return s;
}

/// Nonnegative lower-triangular matrix, strictly row diagonally dominant, with some structural zeros.
inline Eigen::MatrixXd random_dominant_lower(int n, Rng& rng) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < i; ++j)
            if (uniform_real(rng, 0.0, 1.0) < 0.7) {
                D(i, j) = uniform_real(rng, 0.0, 1.0) * std::pow(0.7, i - j);
                off += D(i, j);
            }
        D(i, i) = off * uniform_real(rng, 1.0 + 1e-6, 3.0) + uniform_real(rng, 1e-6, 0.1);
    }
    return D;
}

/// x(n+1) = A x(n) + B h u stepped with the assembled sparse matrices, independent of SystemMatrices::apply.
inline Eigen::VectorXd reference_step(const pbf::SystemMatrices& sys, const Eigen::VectorXd& x, const pbf::MaskVector& h,
                                      double u) {
    Eigen::VectorXd y = sys.A * x;
    if (!h.empty())
        y += sys.B * (pbf::to_dense(h, sys.mesh.state_size()) * u);
    return y;
}

inline pbf::MeshSpec cube_mesh(int n1, int n2, int layers, double d, double dt) {
    return pbf::MeshSpec{n1, n2, layers, d, d, d, dt};
}

} // namespace testing

namespace testing {

/// Three-track serpentine over a 6x5 layer, 2 elements per sample, 3x3-element voxels.
struct Serpentine6x5 {
    pbf::MeshSpec mesh{6, 5, 1, 1e-4, 1e-4, 1e-4, 1e-4};
    pbf::PartGeometry geom = pbf::make_rectangle(6, 5, 1);
    pbf::RasterParams raster{2e-4, 2.0, 0.0, 0.0, 1};
    pbf::VoxelGridSpec voxels = pbf::VoxelGridSpec::covering(1, 1, 6, 5, 3, 3);
};

} // namespace testing
