#pragma once

#include "pbf/geometry.hpp"
#include "pbf/lifted.hpp"
#include "pbf/measurement.hpp"
#include "pbf/path.hpp"
#include "pbf/thermal.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace pbf {

struct SilcConfig {
    double gamma = 0.2;
    double reference = 40.0;  // output units (pixels for melt-pool area)
    double u_nominal = 250.0; // W
    double u_min = 0.0;       // W
    double u_max = 400.0;     // W
    int start_layer = 1;      // first layer whose error drives an update
    bool saturate = true;
    bool control = true; // false: every layer runs at u_nominal

    void validate() const;
};

/// Values attached to voxel ids, ids strictly increasing.
struct VoxelMap {
    std::vector<int> ids;
    Eigen::VectorXd values;

    std::size_t size() const { return ids.size(); }
    std::optional<double> find(int id) const;
    static VoxelMap constant(std::vector<int> ids, double value);
};

/// u + gamma e, clamped to [u_min, u_max] when saturation is on.
VoxelMap silc_update(const VoxelMap& u, const VoxelMap& e, const SilcConfig& cfg);
/// y_d - y with a scalar reference broadcast over every voxel.
VoxelMap tracking_error(double reference, const VoxelMap& y);
VoxelMap tracking_error(const VoxelMap& reference, const VoxelMap& y);

/// Spectral radius of I - gamma G.
double convergence_margin(const Eigen::MatrixXd& G, double gamma);

/// Powers for the next layer's voxels: shared ids carry over, new ids start at u_nominal.
VoxelMap transfer_between_layers(const VoxelMap& u, const std::vector<int>& next_ids, double u_nominal);

/// Voxel lattice anchored at the part bounding box over the whole build.
VoxelGridSpec voxel_grid_for(const PartGeometry& geom, int size1, int size2);

struct PlantConfig {
    MeshSpec mesh;
    MaterialParams material;
    BoundaryOptions boundary;
    PartGeometry geometry;
    BeamProfile beam = BeamProfile::point();
    MeasurementKind measurement;
    VoxelGridSpec voxels;
    LookupMode p_mode = LookupMode::Forward;
};

/// Everything the plant needs to run one layer.
struct LayerSetup {
    SystemMatrices sys;
    PathSchedule path;
    std::vector<MaskVector> masks;
    SampleSets sets; // voxels holding output samples
};

LayerSetup prepare_layer(const PlantConfig& plant, const RasterParams& raster, int layer);

/**
 * Temporal power sequence P u_s. Samples whose look-up row is empty but
 * which still drive the laser over the part (e.g. sample 0 under the backward
 * look-up when its voxel holds no output) run at `fill`.
 */
Eigen::VectorXd expand_inputs(const LayerSetup& setup, const Eigen::MatrixXd& P, const VoxelMap& u_s, double fill);

struct LayerRecord {
    int layer = 0;
    double angle_deg = 0.0;
    int n_t = 0;
    VoxelMap u_s;
    VoxelMap y_s;
    VoxelMap e_s;
    PathSchedule path;
};

using LayerObserver = std::function<void(const LayerRecord&)>;

/**
 * Layer-by-layer build. Each layer is scanned from the reset state with
 * powers looked up from u_s; the voxel outputs give the error that updates
 * u_s for the next layer once `start_layer` is reached.
 */
std::vector<LayerRecord> run_closed_loop(const PlantConfig& plant, const RasterParams& raster, const SilcConfig& silc,
                                         int layers, const LayerObserver& observer = {});

enum class Region { Center, Edge, Corner };
enum class RegionScheme {
    Prism,   // corner = rightmost ten scan tracks, edge = top/bottom voxel of each column
    Boundary // edge = voxel missing any of its four neighbours
};

const char* to_string(Region r);
RegionScheme parse_region_scheme(const std::string& s);
std::string to_string(RegionScheme s);

std::vector<Region> classify_regions(const std::vector<int>& ids, const VoxelGridSpec& vspec, RegionScheme scheme,
                                     const LayerMask& mask, double hatch_elements);

struct RegionStats {
    double mean_output = 0.0;
    double mean_power = 0.0;
    double mean_abs_error = 0.0;
    int count = 0;
};

struct LayerSummary {
    int layer = 0;
    double mean_abs_error = 0.0;
    double max_abs_error = 0.0;
    RegionStats center, edge, corner;
};

LayerSummary summarize(const LayerRecord& rec, const std::vector<Region>& regions);

/// Rows `layer,voxel_id,vx,vy,u_s,y_s,e_s`.
void write_history_csv(std::ostream& out, const std::vector<LayerRecord>& history, const VoxelGridSpec& vspec);

} // namespace pbf
