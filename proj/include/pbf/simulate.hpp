#pragma once

#include "pbf/measurement.hpp"
#include "pbf/path.hpp"
#include "pbf/thermal.hpp"

#include <Eigen/Dense>

#include <vector>

namespace pbf {

struct LayerResponse {
    ThermalState final_state;
    /// outputs[n-1] = y_t(n), n = 1..N_t
    Eigen::VectorXd outputs;
};

/**
 * Runs one layer from x0: during sample n every mesh step applies
 * x <- A x + B h(m) u_t(n), then y_t(n+1) is read from the state.
 * `masks` holds h(m) for every mesh step of the schedule.
 */
LayerResponse simulate_layer(const ThermalState& x0, const PathSchedule& sched, const std::vector<MaskVector>& masks,
                             const Eigen::VectorXd& u_t, const SystemMatrices& sys, const MeasurementKind& kind);

} // namespace pbf
