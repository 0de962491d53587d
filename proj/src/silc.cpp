#include "pbf/silc.hpp"

#include "pbf/error.hpp"
#include "pbf/io.hpp"
#include "pbf/simulate.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace pbf {

void SilcConfig::validate() const {
    if (!(gamma > 0.0))
        throw ArgumentError("gamma must be positive");
    if (!(u_min <= u_nominal && u_nominal <= u_max))
        throw ArgumentError("nominal power must lie within [power_min, power_max]");
    if (start_layer < 1)
        throw ArgumentError("start_layer must be at least 1");
}

std::optional<double> VoxelMap::find(int id) const {
    const auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id)
        return std::nullopt;
    return values[it - ids.begin()];
}

VoxelMap VoxelMap::constant(std::vector<int> ids, double value) {
    VoxelMap m;
    m.values = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(ids.size()), value);
    m.ids = std::move(ids);
    return m;
}

VoxelMap silc_update(const VoxelMap& u, const VoxelMap& e, const SilcConfig& cfg) {
    if (u.ids != e.ids)
        throw DimensionError("power and error maps cover different voxels");
    VoxelMap next{u.ids, u.values + cfg.gamma * e.values};
    if (cfg.saturate)
        next.values = next.values.cwiseMax(cfg.u_min).cwiseMin(cfg.u_max);
    return next;
}

VoxelMap tracking_error(double reference, const VoxelMap& y) {
    return VoxelMap{y.ids, (Eigen::VectorXd::Constant(y.values.size(), reference) - y.values).eval()};
}

VoxelMap tracking_error(const VoxelMap& reference, const VoxelMap& y) {
    VoxelMap e{y.ids, Eigen::VectorXd(y.values.size())};
    for (std::size_t i = 0; i < y.ids.size(); ++i) {
        const auto r = reference.find(y.ids[i]);
        if (!r)
            throw DimensionError("reference map lacks voxel " + std::to_string(y.ids[i]));
        e.values[static_cast<Eigen::Index>(i)] = *r - y.values[static_cast<Eigen::Index>(i)];
    }
    return e;
}

double convergence_margin(const Eigen::MatrixXd& G, double gamma) {
    if (G.rows() != G.cols())
        throw DimensionError("convergence margin needs a square gain");
    if (G.rows() == 0)
        return 0.0;
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(G.rows(), G.cols()) - gamma * G;
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

VoxelMap transfer_between_layers(const VoxelMap& u, const std::vector<int>& next_ids, double u_nominal) {
    VoxelMap out{next_ids, Eigen::VectorXd(static_cast<Eigen::Index>(next_ids.size()))};
    for (std::size_t i = 0; i < next_ids.size(); ++i)
        out.values[static_cast<Eigen::Index>(i)] = u.find(next_ids[i]).value_or(u_nominal);
    return out;
}

VoxelGridSpec voxel_grid_for(const PartGeometry& geom, int size1, int size2) {
    const BoundingBox b = geom.bounds();
    return VoxelGridSpec::covering(b.lo1, b.lo2, b.hi1, b.hi2, size1, size2);
}

LayerSetup prepare_layer(const PlantConfig& plant, const RasterParams& raster, int layer) {
    LayerSetup s{build_system(plant.mesh, plant.material, plant.geometry, layer, plant.boundary),
                 generate_raster(plant.geometry, plant.mesh, layer, raster),
                 {},
                 {}};
    s.masks = mask_sequence(s.path, plant.geometry.layer(layer), plant.mesh, plant.beam);
    s.sets = register_samples(s.path, plant.voxels).with_outputs();
    return s;
}

Eigen::VectorXd expand_inputs(const LayerSetup& setup, const Eigen::MatrixXd& P, const VoxelMap& u_s, double fill) {
    if (P.cols() != u_s.values.size())
        throw DimensionError("look-up table size does not match the power map");
    Eigen::VectorXd u = P * u_s.values;
    const int k = setup.path.substeps;
    for (Eigen::Index n = 0; n < P.rows(); ++n) {
        if (P.row(n).any())
            continue;
        for (int s = 0; s < k; ++s)
            if (!setup.masks[static_cast<std::size_t>(n) * k + s].empty()) {
                u[n] = fill;
                break;
            }
    }
    return u;
}

std::vector<LayerRecord> run_closed_loop(const PlantConfig& plant, const RasterParams& raster, const SilcConfig& silc,
                                         int layers, const LayerObserver& observer) {
    silc.validate();
    plant.measurement.validate();
    if (layers < 0 || layers > plant.geometry.layer_count())
        throw ArgumentError("layer count outside 0.." + std::to_string(plant.geometry.layer_count()));
    std::vector<LayerRecord> history;
    VoxelMap carried;
    ThermalState state{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(plant.mesh.state_size())), 1};
    for (int l = 1; l <= layers; ++l) {
        const LayerSetup setup = prepare_layer(plant, raster, l);
        const int n_t = setup.path.sample_count();
        const Eigen::MatrixXd P = build_P(setup.sets, n_t, plant.p_mode);
        const Eigen::MatrixXd Q = build_Q(setup.sets, n_t);

        LayerRecord rec;
        rec.layer = l;
        rec.angle_deg = setup.path.angle_deg;
        rec.n_t = n_t;
        rec.u_s = transfer_between_layers(carried, setup.sets.voxel_ids, silc.u_nominal);
        const Eigen::VectorXd u_t = expand_inputs(setup, P, rec.u_s, silc.u_nominal);
        const LayerResponse resp = simulate_layer(state, setup.path, setup.masks, u_t, setup.sys, plant.measurement);
        rec.y_s = VoxelMap{setup.sets.voxel_ids, Q * resp.outputs};
        rec.e_s = tracking_error(silc.reference, rec.y_s);
        rec.path = setup.path;

        if (silc.control && l >= silc.start_layer)
            carried = silc_update(rec.u_s, rec.e_s, silc);
        else
            carried = rec.u_s;
        state = recoat_and_shift(resp.final_state, plant.mesh);
        if (observer)
            observer(rec);
        history.push_back(std::move(rec));
    }
    return history;
}

const char* to_string(Region r) {
    switch (r) {
    case Region::Center:
        return "center";
    case Region::Edge:
        return "edge";
    case Region::Corner:
        return "corner";
    }
    return "?";
}

RegionScheme parse_region_scheme(const std::string& s) {
    if (s == "prism")
        return RegionScheme::Prism;
    if (s == "boundary")
        return RegionScheme::Boundary;
    throw ArgumentError("unknown region scheme '" + s + "' (prism, boundary)");
}

std::string to_string(RegionScheme s) { return s == RegionScheme::Prism ? "prism" : "boundary"; }

std::vector<Region> classify_regions(const std::vector<int>& ids, const VoxelGridSpec& vspec, RegionScheme scheme,
                                     const LayerMask& mask, double hatch_elements) {
    const std::set<int> present(ids.begin(), ids.end());
    auto has = [&](int vx, int vy) {
        if (vx < 1 || vx > vspec.m1 || vy < 1 || vy > vspec.m2)
            return false;
        return present.count(voxel_id(VoxelCoord{vx, vy}, vspec)) > 0;
    };
    double corner_from = 1e300;
    if (scheme == RegionScheme::Prism) {
        int right = 0;
        for (int d2 = 1; d2 <= mask.n2(); ++d2)
            for (int d1 = 1; d1 <= mask.n1(); ++d1)
                if (mask(d1, d2))
                    right = std::max(right, d1);
        corner_from = right - 9.5 * hatch_elements;
    }
    std::vector<Region> out;
    out.reserve(ids.size());
    for (int id : ids) {
        const VoxelCoord c = voxel_coord(id, vspec);
        if (scheme == RegionScheme::Prism) {
            const double centre = vspec.origin1 + (c.vx - 1) * vspec.size1 + 0.5 * (vspec.size1 - 1);
            if (centre >= corner_from)
                out.push_back(Region::Corner);
            else if (!has(c.vx, c.vy - 1) || !has(c.vx, c.vy + 1))
                out.push_back(Region::Edge);
            else
                out.push_back(Region::Center);
        } else {
            const bool inner = has(c.vx - 1, c.vy) && has(c.vx + 1, c.vy) && has(c.vx, c.vy - 1) && has(c.vx, c.vy + 1);
            out.push_back(inner ? Region::Center : Region::Edge);
        }
    }
    return out;
}

LayerSummary summarize(const LayerRecord& rec, const std::vector<Region>& regions) {
    if (regions.size() != rec.y_s.size())
        throw DimensionError("region labels do not match the layer's voxels");
    LayerSummary s;
    s.layer = rec.layer;
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        const double ae = std::abs(rec.e_s.values[idx]);
        s.mean_abs_error += ae;
        s.max_abs_error = std::max(s.max_abs_error, ae);
        RegionStats& r = regions[i] == Region::Center ? s.center : regions[i] == Region::Edge ? s.edge : s.corner;
        r.mean_output += rec.y_s.values[idx];
        r.mean_power += rec.u_s.values[idx];
        r.mean_abs_error += ae;
        ++r.count;
    }
    if (!regions.empty())
        s.mean_abs_error /= static_cast<double>(regions.size());
    for (RegionStats* r : {&s.center, &s.edge, &s.corner})
        if (r->count > 0) {
            r->mean_output /= r->count;
            r->mean_power /= r->count;
            r->mean_abs_error /= r->count;
        }
    return s;
}

void write_history_csv(std::ostream& out, const std::vector<LayerRecord>& history, const VoxelGridSpec& vspec) {
    out << "layer,voxel_id,vx,vy,u_s,y_s,e_s\n";
    for (const auto& rec : history)
        for (std::size_t i = 0; i < rec.u_s.size(); ++i) {
            const auto idx = static_cast<Eigen::Index>(i);
            const VoxelCoord c = voxel_coord(rec.u_s.ids[i], vspec);
            out << rec.layer << ',' << rec.u_s.ids[i] << ',' << c.vx << ',' << c.vy << ','
                << format_number(rec.u_s.values[idx]) << ',' << format_number(rec.y_s.values[idx]) << ','
                << format_number(rec.e_s.values[idx]) << '\n';
        }
}

} // namespace pbf
