#pragma once

#include "pbf/geometry.hpp"
#include "pbf/grid.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace pbf {

struct RasterParams {
    double hatch = 100e-6;       // m, spacing between scan lines
    double speed = 0.8;          // m/s
    double base_angle_deg = 0.0; // scan direction of layer 0, from +x towards +y
    double rotation_deg = 0.0;   // added per layer
    int substeps = 1;            // mesh steps per camera sample

    void validate() const;
};

/// Scan direction for build layer `layer`, in [0, 180).
double layer_angle(int layer, const RasterParams& params);

struct PathStep {
    int d1 = 1;
    int d2 = 1;
    bool on = false;
    friend bool operator==(const PathStep&, const PathStep&) = default;
};

/**
 * Laser position at every mesh step of one layer.
 *
 * Camera sample n (n = 0..N_t) is taken at mesh step n * substeps; the input
 * u_t(n) is held over mesh steps n*substeps .. (n+1)*substeps - 1. The last
 * entry of `steps` is the terminal position used only for registration.
 */
struct PathSchedule {
    int layer = 1;
    int substeps = 1;
    double angle_deg = 0.0;
    std::vector<PathStep> steps;

    int sample_count() const { return static_cast<int>(steps.size() - 1) / substeps; }
    int mesh_steps() const { return static_cast<int>(steps.size()) - 1; }
    /// Position at camera sample n, n in 0..N_t.
    const PathStep& sample_position(int n) const;
    /// Element struck on the last mesh step before sample n, n in 1..N_t.
    const PathStep& struck_before(int n) const;
};

/**
 * Serpentine raster over the layer mask. Lines are `hatch` apart, run along
 * the layer angle and are clipped to the span of in-part elements they cross.
 * The laser moves at `speed` along lines and connectors; each mesh step snaps
 * its continuous position to the nearest element (ties to the lower index).
 */
PathSchedule generate_raster(const PartGeometry& geom, const MeshSpec& spec, int layer, const RasterParams& params);
PathSchedule generate_raster(const LayerMask& mask, const MeshSpec& spec, int layer, double angle_deg,
                             const RasterParams& params);

/// Sparse distribution vector: (0-based state offset, weight).
using MaskVector = std::vector<std::pair<std::size_t, double>>;

/**
 * How the commanded power is spread over top-layer elements around the
 * struck element. Weights landing on powder are dropped and the remainder is
 * renormalised to sum to one.
 */
class BeamProfile {
  public:
    struct Tap {
        int di;
        int dj;
        double weight;
    };

    /// All power on the struck element.
    static BeamProfile point();
    /// Gaussian of standard deviation sigma (m), truncated at two sigma.
    static BeamProfile gaussian(double sigma, double dx, double dy);
    /// Arbitrary taps relative to the struck element.
    static BeamProfile kernel(std::vector<Tap> taps);

    const std::vector<Tap>& taps() const { return taps_; }
    MaskVector weights(const PathStep& step, const LayerMask& top, const MeshSpec& spec) const;

  private:
    std::vector<Tap> taps_;
};

/// h(m) for every mesh step m = 0..mesh_steps()-1; OFF steps give an empty vector.
std::vector<MaskVector> mask_sequence(const PathSchedule& sched, const LayerMask& top, const MeshSpec& spec,
                                      const BeamProfile& beam = BeamProfile::point());

Eigen::VectorXd to_dense(const MaskVector& h, std::size_t size);

/**
 * Sample indices registered to each voxel. Voxels appear in increasing id
 * order; only voxels holding at least one ON sample are listed.
 */
struct SampleSets {
    int n_t = 0;
    std::vector<int> voxel_ids;
    std::vector<std::vector<int>> samples;

    std::size_t size() const { return voxel_ids.size(); }
    /// Drops voxels that hold no output sample (1..N_t); kept lists are unchanged.
    SampleSets with_outputs() const;
    /// Samples of voxel v (0-based) that carry an output, i.e. lie in 1..N_t.
    std::vector<int> output_samples(std::size_t v) const;
    /// Voxel index (0-based position in voxel_ids) holding sample n, or -1.
    int owner(int n) const;
};

SampleSets register_samples(const PathSchedule& sched, const VoxelGridSpec& vspec);

/// Rows `layer,n,d1,d2,on`, one per mesh step including the terminal position.
void write_path_csv(std::ostream& out, const PathSchedule& sched, bool header = true);

} // namespace pbf
