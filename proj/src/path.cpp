#include "pbf/path.hpp"

#include "pbf/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>

namespace pbf {

void RasterParams::validate() const {
    if (!(hatch > 0.0) || !(speed > 0.0))
        throw ArgumentError("hatch and speed must be positive");
    if (substeps < 1)
        throw ArgumentError("substeps must be at least 1");
    if (!std::isfinite(base_angle_deg) || !std::isfinite(rotation_deg))
        throw ArgumentError("scan angles must be finite");
}

double layer_angle(int layer, const RasterParams& params) {
    double a = std::fmod(params.base_angle_deg + layer * params.rotation_deg, 180.0);
    if (a < 0.0)
        a += 180.0;
    return a;
}

const PathStep& PathSchedule::sample_position(int n) const {
    if (n < 0 || n > sample_count())
        throw RangeError("sample " + std::to_string(n) + " outside 0.." + std::to_string(sample_count()));
    return steps[static_cast<std::size_t>(n) * substeps];
}

const PathStep& PathSchedule::struck_before(int n) const {
    if (n < 1 || n > sample_count())
        throw RangeError("sample " + std::to_string(n) + " outside 1.." + std::to_string(sample_count()));
    return steps[static_cast<std::size_t>(n) * substeps - 1];
}

namespace {

struct Point {
    double x;
    double y;
};

int snap(double coord, double spacing) {
    // nearest element centre, centres at (i-1)*spacing; exact ties go to the lower index
    return static_cast<int>(std::ceil(coord / spacing - 0.5 - 1e-9)) + 1;
}

} // namespace

PathSchedule generate_raster(const PartGeometry& geom, const MeshSpec& spec, int layer, const RasterParams& params) {
    return generate_raster(geom.layer(layer), spec, layer, layer_angle(layer, params), params);
}

PathSchedule generate_raster(const LayerMask& mask, const MeshSpec& spec, int layer, double angle_deg,
                             const RasterParams& params) {
    params.validate();
    if (mask.n1() != spec.n1 || mask.n2() != spec.n2)
        throw DimensionError("layer mask does not match mesh");
    if (mask.empty())
        throw GeometryError("layer " + std::to_string(layer) + " has an empty mask");
    if (!(angle_deg >= 0.0 && angle_deg < 180.0))
        throw ArgumentError("scan angle must lie in [0, 180)");

    const double th = angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(th);
    const double s = std::sin(th);
    const double tol = 1e-9 * std::max(spec.dx, spec.dy);

    // element centres projected on the scan normal (h) and scan direction (t)
    std::vector<std::pair<double, double>> ht;
    double hmin = 1e300, hmax = -1e300;
    for (int d2 = 1; d2 <= spec.n2; ++d2)
        for (int d1 = 1; d1 <= spec.n1; ++d1)
            if (mask(d1, d2)) {
                const double x = (d1 - 1) * spec.dx;
                const double y = (d2 - 1) * spec.dy;
                const double h = -s * x + c * y;
                ht.emplace_back(h, c * x + s * y);
                hmin = std::min(hmin, h);
                hmax = std::max(hmax, h);
            }
    const double half_band = 0.5 * (std::abs(spec.dx * s) + std::abs(spec.dy * c));

    std::vector<Point> waypoints;
    std::vector<std::pair<std::size_t, std::size_t>> line_pts; // waypoint indices of each line
    int kept = 0;
    for (int k = 0;; ++k) {
        const double hk = hmin + k * params.hatch;
        if (hk > hmax + tol)
            break;
        double tmin = 1e300, tmax = -1e300;
        for (const auto& [h, t] : ht)
            if (std::abs(h - hk) <= half_band + tol) {
                tmin = std::min(tmin, t);
                tmax = std::max(tmax, t);
            }
        if (tmin > tmax)
            continue;
        const double ta = kept % 2 == 0 ? tmin : tmax;
        const double tb = kept % 2 == 0 ? tmax : tmin;
        const std::size_t first = waypoints.size();
        waypoints.push_back({-s * hk + c * ta, c * hk + s * ta});
        waypoints.push_back({-s * hk + c * tb, c * hk + s * tb});
        line_pts.emplace_back(first, first + 1);
        ++kept;
    }

    // cumulative arc length at each waypoint
    std::vector<double> cum(waypoints.size(), 0.0);
    for (std::size_t i = 1; i < waypoints.size(); ++i)
        cum[i] = cum[i - 1] + std::hypot(waypoints[i].x - waypoints[i - 1].x, waypoints[i].y - waypoints[i - 1].y);
    const double total = cum.back();
    const double ds = params.speed * spec.dt;

    std::vector<double> arc;
    const auto m_end = static_cast<long>(std::ceil(total / ds - 1e-9));
    for (long m = 0; m < m_end; ++m)
        arc.push_back(m * ds);
    arc.push_back(total);
    // lines shorter than one step still get one position
    for (const auto& [a, b] : line_pts) {
        const double sa = cum[a], sb = cum[b];
        const bool hit = std::any_of(arc.begin(), arc.end(), [&](double v) { return v >= sa - tol && v <= sb + tol; });
        if (!hit)
            arc.push_back(0.5 * (sa + sb));
    }
    std::sort(arc.begin(), arc.end());

    const int k = params.substeps;
    const int moves = static_cast<int>(arc.size()) - 1;
    const int n_t = std::max(1, moves / k);
    arc.resize(static_cast<std::size_t>(n_t) * k + 1, total);

    auto position = [&](double v) {
        const auto it = std::upper_bound(cum.begin(), cum.end(), v);
        std::size_t seg = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
        if (seg + 1 >= waypoints.size())
            return waypoints.back();
        const double len = cum[seg + 1] - cum[seg];
        const double f = len > 0.0 ? (v - cum[seg]) / len : 0.0;
        return Point{waypoints[seg].x + f * (waypoints[seg + 1].x - waypoints[seg].x),
                     waypoints[seg].y + f * (waypoints[seg + 1].y - waypoints[seg].y)};
    };

    PathSchedule sched;
    sched.layer = layer;
    sched.substeps = k;
    sched.angle_deg = angle_deg;
    sched.steps.reserve(arc.size());
    for (double v : arc) {
        const Point p = position(v);
        const int d1 = snap(p.x, spec.dx);
        const int d2 = snap(p.y, spec.dy);
        PathStep st;
        st.on = mask(d1, d2);
        st.d1 = std::clamp(d1, 1, spec.n1);
        st.d2 = std::clamp(d2, 1, spec.n2);
        sched.steps.push_back(st);
    }
    return sched;
}

BeamProfile BeamProfile::point() { return kernel({{0, 0, 1.0}}); }

BeamProfile BeamProfile::gaussian(double sigma, double dx, double dy) {
    if (!(sigma > 0.0))
        return point();
    const int r1 = static_cast<int>(std::ceil(2.0 * sigma / dx));
    const int r2 = static_cast<int>(std::ceil(2.0 * sigma / dy));
    std::vector<Tap> taps;
    for (int dj = -r2; dj <= r2; ++dj)
        for (int di = -r1; di <= r1; ++di) {
            const double rr = (di * dx) * (di * dx) + (dj * dy) * (dj * dy);
            if (rr <= 4.0 * sigma * sigma * (1.0 + 1e-12))
                taps.push_back({di, dj, std::exp(-rr / (2.0 * sigma * sigma))});
        }
    return kernel(std::move(taps));
}

BeamProfile BeamProfile::kernel(std::vector<Tap> taps) {
    if (taps.empty())
        throw ArgumentError("beam kernel needs at least one tap");
    for (const auto& t : taps)
        if (!(t.weight >= 0.0))
            throw ArgumentError("beam kernel weights must be nonnegative");
    BeamProfile b;
    b.taps_ = std::move(taps);
    return b;
}

MaskVector BeamProfile::weights(const PathStep& step, const LayerMask& top, const MeshSpec& spec) const {
    MaskVector h;
    if (!step.on)
        return h;
    double sum = 0.0;
    for (const auto& t : taps_) {
        const int d1 = step.d1 + t.di;
        const int d2 = step.d2 + t.dj;
        if (t.weight > 0.0 && top(d1, d2)) {
            h.emplace_back(spec.top_offset(d1, d2), t.weight);
            sum += t.weight;
        }
    }
    if (sum <= 0.0)
        return {};
    for (auto& e : h)
        e.second /= sum;
    std::sort(h.begin(), h.end());
    return h;
}

std::vector<MaskVector> mask_sequence(const PathSchedule& sched, const LayerMask& top, const MeshSpec& spec,
                                      const BeamProfile& beam) {
    std::vector<MaskVector> out;
    out.reserve(static_cast<std::size_t>(sched.mesh_steps()));
    for (int m = 0; m < sched.mesh_steps(); ++m)
        out.push_back(beam.weights(sched.steps[static_cast<std::size_t>(m)], top, spec));
    return out;
}

Eigen::VectorXd to_dense(const MaskVector& h, std::size_t size) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
    for (const auto& [i, w] : h) {
        if (i >= size)
            throw DimensionError("mask entry outside vector");
        v[static_cast<Eigen::Index>(i)] += w;
    }
    return v;
}

std::vector<int> SampleSets::output_samples(std::size_t v) const {
    std::vector<int> kept;
    for (int n : samples.at(v))
        if (n >= 1 && n <= n_t)
            kept.push_back(n);
    return kept;
}

SampleSets SampleSets::with_outputs() const {
    SampleSets out;
    out.n_t = n_t;
    for (std::size_t v = 0; v < voxel_ids.size(); ++v)
        if (!output_samples(v).empty()) {
            out.voxel_ids.push_back(voxel_ids[v]);
            out.samples.push_back(samples[v]);
        }
    return out;
}

int SampleSets::owner(int n) const {
    for (std::size_t v = 0; v < samples.size(); ++v)
        if (std::binary_search(samples[v].begin(), samples[v].end(), n))
            return static_cast<int>(v);
    return -1;
}

SampleSets register_samples(const PathSchedule& sched, const VoxelGridSpec& vspec) {
    std::map<int, std::vector<int>> sets;
    const int n_t = sched.sample_count();
    for (int n = 0; n <= n_t; ++n) {
        const PathStep& p = sched.sample_position(n);
        if (p.on)
            sets[element_to_voxel(p.d1, p.d2, vspec)].push_back(n);
    }
    SampleSets out;
    out.n_t = n_t;
    for (auto& [id, list] : sets) {
        out.voxel_ids.push_back(id);
        out.samples.push_back(std::move(list));
    }
    return out;
}

void write_path_csv(std::ostream& out, const PathSchedule& sched, bool header) {
    if (header)
        out << "layer,n,d1,d2,on\n";
    for (std::size_t m = 0; m < sched.steps.size(); ++m) {
        const auto& st = sched.steps[m];
        out << sched.layer << ',' << m << ',' << st.d1 << ',' << st.d2 << ',' << (st.on ? 1 : 0) << '\n';
    }
}

} // namespace pbf
