#pragma once

#include "pbf/geometry.hpp"
#include "pbf/grid.hpp"
#include "pbf/lifted.hpp"
#include "pbf/measurement.hpp"
#include "pbf/path.hpp"
#include "pbf/silc.hpp"
#include "pbf/thermal.hpp"

#include <filesystem>
#include <set>
#include <string>

namespace pbf {

extern const char* const toolkit_version;

enum class GeometrySource { Prism, HalfEllipsoid, Rectangle, MaskFile };

/**
 * One experiment. Lengths in metres, times in seconds, temperatures in K
 * above ambient, powers in W, angles in degrees. Mesh extents n1 x n2 come
 * from the geometry.
 */
struct RunConfig {
    double dx = 20e-6;
    double dy = 20e-6;
    double dz = 50e-6;
    double dt = 12.5e-6;
    int window_layers = 3;

    MaterialParams material{33.5, 6e-6, 0.026};
    BoundaryOptions boundary;

    GeometrySource geometry = GeometrySource::Prism;
    std::string mask_file;              // as written in the config
    std::filesystem::path mask_path;    // resolved against the config directory
    double prism_length = 3e-3;
    double prism_width = 2e-3;
    double prism_taper = 0.5;
    double ellipsoid_a = 1.5e-3;
    double ellipsoid_b = 1e-3;
    double ellipsoid_height = 4e-3;
    double rect_length = 1e-3;
    double rect_width = 1e-3;
    int layers = 10;  // build layers of prism and rectangle
    int margin = 2;   // powder elements around the part

    RasterParams raster{100e-6, 0.8, 0.0, 0.0, 40};
    bool gaussian_beam = true;
    double beam_sigma = 100e-6;
    double voxel_size = 400e-6;
    MeasurementKind measurement = MeasurementKind::meltpool_area(100.0, 3.0);
    LookupMode lookup = LookupMode::Forward;

    SilcConfig silc;
    RegionScheme regions = RegionScheme::Prism;
    int run_layers = 0; // 0 runs every build layer

    int pulse_samples = 10;
    int pulse_extent = 20; // elements per side of the pulse block
    int pulse_depth = 10;  // layers of the pulse block

    unsigned threads = 1;
    std::string output_dir = "out";

    /// Keys that appeared in the parsed text.
    std::set<std::string> explicit_keys;

    void validate() const;

    PartGeometry build_geometry() const;
    MeshSpec mesh_for(const PartGeometry& geom) const;
    VoxelGridSpec voxels_for(const PartGeometry& geom) const;
    BeamProfile beam() const;
    PlantConfig plant() const;
    /// Layers a closed-loop run covers for this geometry.
    int layers_to_run(const PartGeometry& geom) const;

    /// Every key with its resolved value; defaults are tagged with a comment.
    std::string to_text() const;
};

/**
 * key=value lines; '#' starts a comment. `geometry` is required. Relative
 * mask paths resolve against `base_dir`. Throws ParseError with the line.
 */
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

} // namespace pbf
