#include "pbf/thermal.hpp"

#include "pbf/error.hpp"

#include <cmath>
#include <sstream>

namespace pbf {

void MaterialParams::validate() const {
    if (!(conductivity > 0.0) || !(diffusivity > 0.0))
        throw ArgumentError("conductivity and diffusivity must be positive");
    if (!(absorptivity > 0.0 && absorptivity <= 1.0))
        throw ArgumentError("absorptivity must lie in (0, 1]");
}

double cfl_number(const MeshSpec& spec, const MaterialParams& mat) {
    return mat.diffusivity * spec.dt *
           (1.0 / (spec.dx * spec.dx) + 1.0 / (spec.dy * spec.dy) + 1.0 / (spec.dz * spec.dz));
}

void SystemMatrices::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    y = x;
    const double* xv = x.data();
    double* yv = y.data();
    for (std::size_t r = 0; r < active_.size(); ++r) {
        double acc = 0.0;
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            acc += vals_[static_cast<std::size_t>(k)] * xv[cols_[static_cast<std::size_t>(k)]];
        yv[active_[r]] = acc;
    }
}

SystemMatrices build_system(const MeshSpec& spec, const MaterialParams& mat, const PartGeometry& geom, int layer,
                            const BoundaryOptions& opts) {
    spec.validate();
    mat.validate();
    if (geom.n1() != spec.n1 || geom.n2() != spec.n2)
        throw DimensionError("geometry grid does not match mesh");
    if (layer < 1 || layer > geom.layer_count())
        throw RangeError("build layer " + std::to_string(layer) + " outside 1.." + std::to_string(geom.layer_count()));
    const double r = opts.powder_conductivity_ratio;
    if (!(r >= 0.0 && r <= 1.0))
        throw ArgumentError("powder conductivity ratio must lie in [0, 1]");
    const double cfl = cfl_number(spec, mat);
    if (cfl > 0.5) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "explicit step unstable: alpha*dt*(1/dx^2+1/dy^2+1/dz^2) = " << cfl << " exceeds 1/2";
        throw StabilityError(msg.str());
    }

    const double lx = mat.diffusivity * spec.dt / (spec.dx * spec.dx);
    const double ly = mat.diffusivity * spec.dt / (spec.dy * spec.dy);
    const double lz = mat.diffusivity * spec.dt / (spec.dz * spec.dz);
    const int L = spec.layers;
    const auto n = static_cast<Eigen::Index>(spec.state_size());

    auto build_layer = [&](int d3) { return layer - L + d3; };
    auto slot_live = [&](int d3) { return d3 >= 1 && d3 <= L && build_layer(d3) >= 1; };
    auto solid = [&](int d1, int d2, int d3) { return geom.in_part(build_layer(d3), d1, d2); };

    SystemMatrices sys;
    sys.mesh = spec;
    sys.layer = layer;
    sys.top_mask = geom.layer(layer);
    sys.input_gain = mat.absorptivity * mat.diffusivity * spec.dt / (mat.conductivity * spec.dx * spec.dy * spec.dz);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(spec.state_size() * 7);
    sys.row_ptr_.push_back(0);

    struct Nb {
        int d1, d2, d3;
        double lam;
    };
    for (int d3 = 1; d3 <= L; ++d3) {
        const bool live = slot_live(d3);
        for (int d2 = 1; d2 <= spec.n2; ++d2) {
            for (int d1 = 1; d1 <= spec.n1; ++d1) {
                const auto p = static_cast<int>(spec.offset(d1, d2, d3));
                if (!live) {
                    trip.emplace_back(p, p, 1.0);
                    continue;
                }
                const bool sp = solid(d1, d2, d3);
                double diag = 1.0;
                const std::size_t start = sys.cols_.size();
                const Nb nbs[] = {{d1 - 1, d2, d3, lx}, {d1 + 1, d2, d3, lx}, {d1, d2 - 1, d3, ly},
                                  {d1, d2 + 1, d3, ly}, {d1, d2, d3 - 1, lz}, {d1, d2, d3 + 1, lz}};
                for (const auto& nb : nbs) {
                    if (nb.d3 < d3 && (d3 == 1 || build_layer(d3) == 1)) {
                        // bottom face on the substrate or on the unmodelled part below the window
                        if (opts.substrate_dirichlet)
                            diag -= (sp ? 1.0 : r) * nb.lam;
                        continue;
                    }
                    if (!spec.contains(nb.d1, nb.d2, nb.d3) || !slot_live(nb.d3))
                        continue;
                    const double c = (sp && solid(nb.d1, nb.d2, nb.d3)) ? 1.0 : r;
                    if (c == 0.0)
                        continue;
                    const double w = c * nb.lam;
                    diag -= w;
                    const auto q = static_cast<int>(spec.offset(nb.d1, nb.d2, nb.d3));
                    trip.emplace_back(p, q, w);
                    sys.cols_.push_back(q);
                    sys.vals_.push_back(w);
                }
                trip.emplace_back(p, p, diag);
                if (sys.cols_.size() == start && diag == 1.0)
                    continue; // identity row
                sys.cols_.push_back(p);
                sys.vals_.push_back(diag);
                sys.active_.push_back(p);
                sys.row_ptr_.push_back(static_cast<int>(sys.cols_.size()));
            }
        }
    }
    sys.A.resize(n, n);
    sys.A.setFromTriplets(trip.begin(), trip.end());

    std::vector<Eigen::Triplet<double>> btrip;
    for (int d2 = 1; d2 <= spec.n2; ++d2)
        for (int d1 = 1; d1 <= spec.n1; ++d1)
            if (sys.top_mask(d1, d2)) {
                const auto p = static_cast<int>(spec.top_offset(d1, d2));
                btrip.emplace_back(p, p, sys.input_gain);
            }
    sys.B.resize(n, n);
    sys.B.setFromTriplets(btrip.begin(), btrip.end());
    return sys;
}

ThermalState step(const ThermalState& state, const Eigen::VectorXd& u, const SystemMatrices& sys) {
    const auto n = static_cast<Eigen::Index>(sys.mesh.state_size());
    if (state.x.size() != n || u.size() != n)
        throw DimensionError("step: state has " + std::to_string(state.x.size()) + " entries, input " +
                             std::to_string(u.size()) + ", system " + std::to_string(n));
    ThermalState next{Eigen::VectorXd(n), state.layer};
    sys.apply(state.x, next.x);
    next.x += sys.B * u;
    return next;
}

Eigen::VectorXd shift_window(const Eigen::VectorXd& x, const MeshSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.state_size());
    if (x.size() != n)
        throw DimensionError("shift: vector length does not match mesh");
    const auto plane = static_cast<Eigen::Index>(spec.plane_size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    if (spec.layers > 1)
        out.head(n - plane) = x.tail(n - plane);
    return out;
}

SparseMatrix shift_matrix(const MeshSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.state_size());
    const auto plane = static_cast<Eigen::Index>(spec.plane_size());
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index i = 0; i + plane < n; ++i)
        trip.emplace_back(static_cast<int>(i), static_cast<int>(i + plane), 1.0);
    SparseMatrix m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

ThermalState recoat_and_shift(const ThermalState& state, const MeshSpec& spec,
                              const std::optional<SparseMatrix>& recoat) {
    const auto n = static_cast<Eigen::Index>(spec.state_size());
    if (state.x.size() != n)
        throw DimensionError("recoat: state length does not match mesh");
    if (!recoat)
        return ThermalState{Eigen::VectorXd::Zero(n), state.layer + 1};
    if (recoat->rows() != n || recoat->cols() != n)
        throw DimensionError("recoat operator does not match mesh");
    Eigen::VectorXd carried = (*recoat) * state.x;
    return ThermalState{shift_window(carried, spec), state.layer + 1};
}

std::vector<double> corner_pulse_decay(const MaterialParams& mat, const MeshSpec& spec, int samples, int substeps) {
    if (samples < 1 || substeps < 1)
        throw ArgumentError("pulse decay needs at least one sample and one substep");
    const PartGeometry block = make_rectangle(spec.n1, spec.n2, spec.layers);
    BoundaryOptions adiabatic;
    adiabatic.substrate_dirichlet = false;
    const SystemMatrices sys = build_system(spec, mat, block, spec.layers, adiabatic);
    const auto corner = static_cast<Eigen::Index>(spec.top_offset(1, 1));
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.state_size()));
    Eigen::VectorXd y(x.size());
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        for (int m = 0; m < substeps; ++m) {
            sys.apply(x, y);
            if (s == 0)
                y[corner] += sys.input_gain;
            x.swap(y);
        }
        out.push_back(x[corner]);
    }
    return out;
}

} // namespace pbf
