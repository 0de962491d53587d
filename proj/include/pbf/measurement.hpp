#pragma once

#include "pbf/grid.hpp"
#include "pbf/path.hpp"

#include <Eigen/Dense>

#include <string>

namespace pbf {

enum class MeasurementType {
    SurfaceSum,   // sum of top-layer temperatures
    MaxTemp,      // temperature of the element struck just before the sample
    MeltpoolArea, // top-layer elements at or above a threshold, in pixels
};

struct MeasurementKind {
    MeasurementType type = MeasurementType::MaxTemp;
    double threshold = 0.0;          // K above ambient, melt-pool area only
    double pixels_per_element = 1.0; // camera pixels covered by one top-layer element

    static MeasurementKind surface_sum() { return {MeasurementType::SurfaceSum}; }
    static MeasurementKind max_temp() { return {MeasurementType::MaxTemp}; }
    static MeasurementKind meltpool_area(double threshold, double pixels_per_element = 1.0) {
        return {MeasurementType::MeltpoolArea, threshold, pixels_per_element};
    }

    bool linear() const { return type != MeasurementType::MeltpoolArea; }
    void validate() const;
};

std::string to_string(MeasurementType t);
MeasurementType parse_measurement_type(const std::string& s);

/**
 * Sampling vector f(n) for output sample n (1..N_t), so that y_t(n) = f(n)^T x(n).
 * The melt-pool variant depends on the state and needs it supplied.
 */
Eigen::VectorXd measurement_vector(const MeasurementKind& kind, int n, const PathSchedule& sched,
                                   const MeshSpec& spec, const Eigen::VectorXd* state = nullptr);

/// y_t(n) evaluated on state x without forming f.
double measure(const MeasurementKind& kind, int n, const PathSchedule& sched, const MeshSpec& spec,
               const Eigen::VectorXd& x);

} // namespace pbf
