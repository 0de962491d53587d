#include "pbf/measurement.hpp"

#include "pbf/error.hpp"

namespace pbf {

void MeasurementKind::validate() const {
    if (type == MeasurementType::MeltpoolArea) {
        if (!(threshold > 0.0))
            throw ArgumentError("melt-pool threshold must be positive");
        if (!(pixels_per_element > 0.0))
            throw ArgumentError("pixels_per_element must be positive");
    }
}

std::string to_string(MeasurementType t) {
    switch (t) {
    case MeasurementType::SurfaceSum:
        return "surface_sum";
    case MeasurementType::MaxTemp:
        return "max_temp";
    case MeasurementType::MeltpoolArea:
        return "meltpool_area";
    }
    return "?";
}

MeasurementType parse_measurement_type(const std::string& s) {
    if (s == "surface_sum")
        return MeasurementType::SurfaceSum;
    if (s == "max_temp")
        return MeasurementType::MaxTemp;
    if (s == "meltpool_area")
        return MeasurementType::MeltpoolArea;
    throw ArgumentError("unknown measurement '" + s + "' (surface_sum, max_temp, meltpool_area)");
}

Eigen::VectorXd measurement_vector(const MeasurementKind& kind, int n, const PathSchedule& sched,
                                   const MeshSpec& spec, const Eigen::VectorXd* state) {
    if (n < 1 || n > sched.sample_count())
        throw RangeError("output sample " + std::to_string(n) + " outside 1.." + std::to_string(sched.sample_count()));
    const auto size = static_cast<Eigen::Index>(spec.state_size());
    const auto plane = static_cast<Eigen::Index>(spec.plane_size());
    Eigen::VectorXd f = Eigen::VectorXd::Zero(size);
    switch (kind.type) {
    case MeasurementType::SurfaceSum:
        f.tail(plane).setOnes();
        break;
    case MeasurementType::MaxTemp: {
        const PathStep& p = sched.struck_before(n);
        if (p.on)
            f[static_cast<Eigen::Index>(spec.top_offset(p.d1, p.d2))] = 1.0;
        break;
    }
    case MeasurementType::MeltpoolArea: {
        if (state == nullptr)
            throw ArgumentError("melt-pool sampling vector needs the current state");
        if (state->size() != size)
            throw DimensionError("state length does not match mesh");
        for (Eigen::Index i = size - plane; i < size; ++i)
            if ((*state)[i] >= kind.threshold)
                f[i] = 1.0;
        break;
    }
    }
    return f;
}

double measure(const MeasurementKind& kind, int n, const PathSchedule& sched, const MeshSpec& spec,
               const Eigen::VectorXd& x) {
    const auto size = static_cast<Eigen::Index>(spec.state_size());
    const auto plane = static_cast<Eigen::Index>(spec.plane_size());
    switch (kind.type) {
    case MeasurementType::SurfaceSum:
        return x.tail(plane).sum();
    case MeasurementType::MaxTemp: {
        const PathStep& p = sched.struck_before(n);
        return p.on ? x[static_cast<Eigen::Index>(spec.top_offset(p.d1, p.d2))] : 0.0;
    }
    case MeasurementType::MeltpoolArea: {
        long count = 0;
        for (Eigen::Index i = size - plane; i < size; ++i)
            if (x[i] >= kind.threshold)
                ++count;
        return kind.pixels_per_element * static_cast<double>(count);
    }
    }
    return 0.0;
}

} // namespace pbf
