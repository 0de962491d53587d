#include "pbf/simulate.hpp"

#include "pbf/error.hpp"

namespace pbf {

LayerResponse simulate_layer(const ThermalState& x0, const PathSchedule& sched, const std::vector<MaskVector>& masks,
                             const Eigen::VectorXd& u_t, const SystemMatrices& sys, const MeasurementKind& kind) {
    const int n_t = sched.sample_count();
    const int k = sched.substeps;
    if (u_t.size() != n_t)
        throw DimensionError("power sequence has " + std::to_string(u_t.size()) + " samples, schedule has " +
                             std::to_string(n_t));
    if (static_cast<int>(masks.size()) != sched.mesh_steps())
        throw DimensionError("mask sequence does not cover the schedule");
    if (x0.x.size() != static_cast<Eigen::Index>(sys.mesh.state_size()))
        throw DimensionError("initial state does not match mesh");
    kind.validate();

    Eigen::VectorXd x = x0.x;
    Eigen::VectorXd y(x.size());
    LayerResponse out;
    out.outputs.resize(n_t);
    for (int n = 0; n < n_t; ++n) {
        const double u = u_t[n];
        for (int s = 0; s < k; ++s) {
            sys.apply(x, y);
            for (const auto& [i, w] : masks[static_cast<std::size_t>(n) * k + s])
                y[static_cast<Eigen::Index>(i)] += sys.input_gain * w * u;
            x.swap(y);
        }
        out.outputs[n] = measure(kind, n + 1, sched, sys.mesh, x);
    }
    out.final_state = ThermalState{std::move(x), x0.layer};
    return out;
}

} // namespace pbf
