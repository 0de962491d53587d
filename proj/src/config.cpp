#include "pbf/config.hpp"

#include "pbf/error.hpp"
#include "pbf/io.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace pbf {

const char* const toolkit_version = "1.0.0";

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v, int line) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ParseError(line, key + ": '" + v + "' is not a number");
    }
    if (used != v.size() || !std::isfinite(d))
        throw ParseError(line, key + ": '" + v + "' is not a number");
    return d;
}

int to_int(const std::string& key, const std::string& v, int line) {
    const double d = to_double(key, v, line);
    if (d != std::floor(d) || std::abs(d) > 1e9)
        throw ParseError(line, key + ": expected an integer, got '" + v + "'");
    return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ParseError(line, key + ": expected true or false, got '" + v + "'");
}

// Lengths are metres; anything this large was almost certainly given in micrometres.
double length(const std::string& key, const std::string& v, int line) {
    const double d = to_double(key, v, line);
    if (!(d > 0.0))
        throw ParseError(line, key + " must be a positive length in metres");
    if (d > 1.0)
        throw ParseError(line, key + "=" + v + " exceeds 1 m; lengths are in metres");
    return d;
}

double nonneg(const std::string& key, const std::string& v, int line) {
    const double d = to_double(key, v, line);
    if (d < 0.0)
        throw ParseError(line, key + " must be nonnegative");
    return d;
}

double positive(const std::string& key, const std::string& v, int line) {
    const double d = to_double(key, v, line);
    if (!(d > 0.0))
        throw ParseError(line, key + " must be positive");
    return d;
}

int positive_int(const std::string& key, const std::string& v, int line) {
    const int i = to_int(key, v, line);
    if (i < 1)
        throw ParseError(line, key + " must be at least 1");
    return i;
}

int nonneg_int(const std::string& key, const std::string& v, int line) {
    const int i = to_int(key, v, line);
    if (i < 0)
        throw ParseError(line, key + " must be nonnegative");
    return i;
}

std::string num(double v) { return format_number(v); }
std::string boolean(bool b) { return b ? "true" : "false"; }

std::string geometry_name(GeometrySource g) {
    switch (g) {
    case GeometrySource::Prism:
        return "prism";
    case GeometrySource::HalfEllipsoid:
        return "half_ellipsoid";
    case GeometrySource::Rectangle:
        return "rectangle";
    case GeometrySource::MaskFile:
        return "mask";
    }
    return "?";
}

struct Key {
    const char* name;
    std::function<void(RunConfig&, const std::string&, int)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define PBF_KEY(name, setter, getter)                                                                                  \
    Key {                                                                                                              \
        name, [](RunConfig& c, const std::string& v, int line) { setter; },                                          \
            [](const RunConfig& c) -> std::string { return getter; }                                                   \
    }

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        PBF_KEY("geometry",
                if (v == "prism") c.geometry = GeometrySource::Prism;
                else if (v == "half_ellipsoid") c.geometry = GeometrySource::HalfEllipsoid;
                else if (v == "rectangle") c.geometry = GeometrySource::Rectangle;
                else if (v == "mask") c.geometry = GeometrySource::MaskFile;
                else throw ParseError(line, "geometry must be prism, half_ellipsoid, rectangle or mask");
                , geometry_name(c.geometry)),
        PBF_KEY("mask_file", (void)line; c.mask_file = v, c.mask_file),
        PBF_KEY("prism_length", c.prism_length = length("prism_length", v, line), num(c.prism_length)),
        PBF_KEY("prism_width", c.prism_width = length("prism_width", v, line), num(c.prism_width)),
        PBF_KEY("prism_taper", c.prism_taper = to_double("prism_taper", v, line);
                if (!(c.prism_taper >= 0.0 && c.prism_taper < 1.0))
                    throw ParseError(line, "prism_taper must lie in [0, 1)"),
                num(c.prism_taper)),
        PBF_KEY("ellipsoid_a", c.ellipsoid_a = length("ellipsoid_a", v, line), num(c.ellipsoid_a)),
        PBF_KEY("ellipsoid_b", c.ellipsoid_b = length("ellipsoid_b", v, line), num(c.ellipsoid_b)),
        PBF_KEY("ellipsoid_height", c.ellipsoid_height = length("ellipsoid_height", v, line),
                num(c.ellipsoid_height)),
        PBF_KEY("rect_length", c.rect_length = length("rect_length", v, line), num(c.rect_length)),
        PBF_KEY("rect_width", c.rect_width = length("rect_width", v, line), num(c.rect_width)),
        PBF_KEY("layers", c.layers = positive_int("layers", v, line), std::to_string(c.layers)),
        PBF_KEY("margin", c.margin = nonneg_int("margin", v, line), std::to_string(c.margin)),
        PBF_KEY("dx", c.dx = length("dx", v, line), num(c.dx)),
        PBF_KEY("dy", c.dy = length("dy", v, line), num(c.dy)),
        PBF_KEY("dz", c.dz = length("dz", v, line), num(c.dz)),
        PBF_KEY("dt", c.dt = positive("dt", v, line);
                if (c.dt > 1.0) throw ParseError(line, "dt exceeds 1 s; time steps are in seconds"), num(c.dt)),
        PBF_KEY("window_layers", c.window_layers = positive_int("window_layers", v, line),
                std::to_string(c.window_layers)),
        PBF_KEY("conductivity", c.material.conductivity = positive("conductivity", v, line),
                num(c.material.conductivity)),
        PBF_KEY("diffusivity", c.material.diffusivity = positive("diffusivity", v, line);
                if (c.material.diffusivity > 1e-2)
                    throw ParseError(line, "diffusivity exceeds 1e-2 m^2/s; units are m^2/s"),
                num(c.material.diffusivity)),
        PBF_KEY("absorptivity", c.material.absorptivity = positive("absorptivity", v, line);
                if (c.material.absorptivity > 1.0) throw ParseError(line, "absorptivity is a fraction in (0, 1]"),
                num(c.material.absorptivity)),
        PBF_KEY("substrate_dirichlet", c.boundary.substrate_dirichlet = to_bool("substrate_dirichlet", v, line),
                boolean(c.boundary.substrate_dirichlet)),
        PBF_KEY("powder_conductivity_ratio", c.boundary.powder_conductivity_ratio =
                                                 nonneg("powder_conductivity_ratio", v, line);
                if (c.boundary.powder_conductivity_ratio > 1.0)
                    throw ParseError(line, "powder_conductivity_ratio is a fraction in [0, 1]"),
                num(c.boundary.powder_conductivity_ratio)),
        PBF_KEY("hatch", c.raster.hatch = length("hatch", v, line), num(c.raster.hatch)),
        PBF_KEY("speed", c.raster.speed = positive("speed", v, line);
                if (c.raster.speed > 100.0) throw ParseError(line, "speed exceeds 100 m/s; units are m/s"),
                num(c.raster.speed)),
        PBF_KEY("base_angle_deg", c.raster.base_angle_deg = to_double("base_angle_deg", v, line),
                num(c.raster.base_angle_deg)),
        PBF_KEY("rotation_deg", c.raster.rotation_deg = to_double("rotation_deg", v, line),
                num(c.raster.rotation_deg)),
        PBF_KEY("substeps", c.raster.substeps = positive_int("substeps", v, line), std::to_string(c.raster.substeps)),
        PBF_KEY("beam",
                if (v == "gaussian") c.gaussian_beam = true;
                else if (v == "point") c.gaussian_beam = false;
                else throw ParseError(line, "beam must be point or gaussian"),
                c.gaussian_beam ? "gaussian" : "point"),
        PBF_KEY("beam_sigma", c.beam_sigma = length("beam_sigma", v, line), num(c.beam_sigma)),
        PBF_KEY("voxel_size", c.voxel_size = length("voxel_size", v, line), num(c.voxel_size)),
        PBF_KEY("measurement", try { c.measurement.type = parse_measurement_type(v); } catch (const Error& e) {
                    throw ParseError(line, e.what());
                },
                to_string(c.measurement.type)),
        PBF_KEY("threshold", c.measurement.threshold = nonneg("threshold", v, line), num(c.measurement.threshold)),
        PBF_KEY("pixels_per_element", c.measurement.pixels_per_element = positive("pixels_per_element", v, line),
                num(c.measurement.pixels_per_element)),
        PBF_KEY("lookup", try { c.lookup = parse_lookup_mode(v); } catch (const Error& e) {
                    throw ParseError(line, e.what());
                },
                to_string(c.lookup)),
        PBF_KEY("gamma", c.silc.gamma = positive("gamma", v, line), num(c.silc.gamma)),
        PBF_KEY("reference", c.silc.reference = to_double("reference", v, line), num(c.silc.reference)),
        PBF_KEY("power_nominal", c.silc.u_nominal = nonneg("power_nominal", v, line), num(c.silc.u_nominal)),
        PBF_KEY("power_min", c.silc.u_min = nonneg("power_min", v, line), num(c.silc.u_min)),
        PBF_KEY("power_max", c.silc.u_max = nonneg("power_max", v, line), num(c.silc.u_max)),
        PBF_KEY("saturate", c.silc.saturate = to_bool("saturate", v, line), boolean(c.silc.saturate)),
        PBF_KEY("start_layer", c.silc.start_layer = positive_int("start_layer", v, line),
                std::to_string(c.silc.start_layer)),
        PBF_KEY("regions", try { c.regions = parse_region_scheme(v); } catch (const Error& e) {
                    throw ParseError(line, e.what());
                },
                to_string(c.regions)),
        PBF_KEY("run_layers", c.run_layers = nonneg_int("run_layers", v, line), std::to_string(c.run_layers)),
        PBF_KEY("pulse_samples", c.pulse_samples = positive_int("pulse_samples", v, line),
                std::to_string(c.pulse_samples)),
        PBF_KEY("pulse_extent", c.pulse_extent = positive_int("pulse_extent", v, line),
                std::to_string(c.pulse_extent)),
        PBF_KEY("pulse_depth", c.pulse_depth = positive_int("pulse_depth", v, line), std::to_string(c.pulse_depth)),
        PBF_KEY("threads", c.threads = static_cast<unsigned>(nonneg_int("threads", v, line)),
                std::to_string(c.threads)),
        PBF_KEY("output_dir", (void)line; c.output_dir = v, c.output_dir),
    };
    return table;
}

#undef PBF_KEY

int elements(double extent, double spacing) { return static_cast<int>(std::lround(extent / spacing)); }

} // namespace

void RunConfig::validate() const {
    if (geometry == GeometrySource::MaskFile) {
        if (mask_file.empty())
            throw ParseError(0, "geometry=mask needs mask_file");
        if (!std::filesystem::exists(mask_path))
            throw ParseError(0, "mask_file '" + mask_path.string() + "' does not exist");
    }
    if (elements(voxel_size, dx) < 1 || elements(voxel_size, dy) < 1)
        throw ParseError(0, "voxel_size is smaller than one element");
    raster.validate();
    measurement.validate();
    material.validate();
    try {
        silc.validate();
    } catch (const ArgumentError& e) {
        throw ParseError(0, e.what());
    }
}

PartGeometry RunConfig::build_geometry() const {
    switch (geometry) {
    case GeometrySource::Prism:
        return make_prism(elements(prism_length, dx), elements(prism_width, dy), prism_taper, layers, margin);
    case GeometrySource::HalfEllipsoid:
        return make_half_ellipsoid(ellipsoid_a, ellipsoid_b, ellipsoid_height, dx, dy, dz, margin);
    case GeometrySource::Rectangle:
        return make_rectangle(elements(rect_length, dx), elements(rect_width, dy), layers, margin);
    case GeometrySource::MaskFile:
        return load_mask_file(mask_path);
    }
    throw ArgumentError("unknown geometry source");
}

MeshSpec RunConfig::mesh_for(const PartGeometry& geom) const {
    MeshSpec m{geom.n1(), geom.n2(), window_layers, dx, dy, dz, dt};
    m.validate();
    return m;
}

VoxelGridSpec RunConfig::voxels_for(const PartGeometry& geom) const {
    return voxel_grid_for(geom, elements(voxel_size, dx), elements(voxel_size, dy));
}

BeamProfile RunConfig::beam() const { return gaussian_beam ? BeamProfile::gaussian(beam_sigma, dx, dy) : BeamProfile::point(); }

PlantConfig RunConfig::plant() const {
    PlantConfig p;
    p.geometry = build_geometry();
    p.mesh = mesh_for(p.geometry);
    p.material = material;
    p.boundary = boundary;
    p.beam = beam();
    p.measurement = measurement;
    p.voxels = voxels_for(p.geometry);
    p.p_mode = lookup;
    return p;
}

int RunConfig::layers_to_run(const PartGeometry& geom) const {
    if (run_layers == 0)
        return geom.layer_count();
    if (run_layers > geom.layer_count())
        throw ArgumentError("run_layers=" + std::to_string(run_layers) + " exceeds the " +
                            std::to_string(geom.layer_count()) + " build layers");
    return run_layers;
}

std::string RunConfig::to_text() const {
    std::ostringstream o;
    for (const Key& k : keys()) {
        o << k.name << '=' << k.get(*this);
        if (!explicit_keys.count(k.name))
            o << "  # default";
        o << '\n';
    }
    return o.str();
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    RunConfig c;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ParseError(line, "expected key=value");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        const Key* found = nullptr;
        for (const Key& k : keys())
            if (key == k.name)
                found = &k;
        if (!found)
            throw ParseError(line, "unknown key '" + key + "'");
        if (c.explicit_keys.count(key))
            throw ParseError(line, "duplicate key '" + key + "'");
        if (value.empty())
            throw ParseError(line, key + " has no value");
        found->set(c, value, line);
        c.explicit_keys.insert(key);
    }
    if (!c.explicit_keys.count("geometry"))
        throw ParseError(0, "missing required key 'geometry'");
    if (!c.mask_file.empty()) {
        const std::filesystem::path p(c.mask_file);
        c.mask_path = p.is_absolute() || base_dir.empty() ? p : (base_dir / p).lexically_normal();
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(0, "cannot read config '" + path.string() + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return parse_config(s.str(), path.parent_path());
}

} // namespace pbf
