#pragma once

#include "pbf/measurement.hpp"
#include "pbf/path.hpp"
#include "pbf/thermal.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pbf {

/// Which sample's voxel supplies the power held during sample n.
enum class LookupMode {
    Backward, // u_t(n) from the voxel of sample n
    Forward,  // u_t(n) from the voxel of sample n + 1
};

std::string to_string(LookupMode m);
LookupMode parse_lookup_mode(const std::string& s);

/// Averaging operator, one row per voxel: q_ij = 1/|S_i ∩ {1..N_t}| on those samples.
Eigen::MatrixXd build_Q(const SampleSets& sets, int n_t);

/// Look-up operator, N_t x N_s; row i (1-based) produces u_t(i-1).
Eigen::MatrixXd build_P(const SampleSets& sets, int n_t, LookupMode mode);

/**
 * Lower-triangular layer gain, d_ij = response at output sample i to a unit
 * input held during sample j-1. Built column by column by propagating the
 * pulse; columns are split across `threads` workers (0 = hardware count).
 */
Eigen::MatrixXd build_DL(const SystemMatrices& sys, const PathSchedule& sched, const std::vector<MaskVector>& masks,
                         const MeasurementKind& kind, unsigned threads = 0);

/// Free-response rows f(n)^T A^(n k), n = 1..N_t.
Eigen::MatrixXd build_CL(const SystemMatrices& sys, const PathSchedule& sched, const MeasurementKind& kind);

/// End-of-layer state produced by a unit input held during each sample (N x N_t).
Eigen::MatrixXd input_to_final_state(const SystemMatrices& sys, const PathSchedule& sched,
                                     const std::vector<MaskVector>& masks);

struct LayerTransition {
    SparseMatrix A_L;
    SparseMatrix B_L;
};

/**
 * Layer-to-layer maps A_L = shift * A_r * A^(N_t k) and B_L = shift * A_r * Btilde.
 * Without a recoat operator both are exactly zero.
 */
LayerTransition build_layer_transition(const SystemMatrices& sys, const PathSchedule& sched,
                                       const std::vector<MaskVector>& masks,
                                       const std::optional<SparseMatrix>& recoat = std::nullopt);

/// Product A_L(l1-1) ... A_L(l2); identity when l1 == l2. a_l[l] holds A_L(l).
Eigen::MatrixXd state_transition(const std::vector<Eigen::MatrixXd>& a_l, int l1, int l2);

Eigen::MatrixXd build_Gs(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& D_L, const Eigen::MatrixXd& P);

struct LiftedSystem {
    SampleSets sets; // voxels with at least one output sample
    LookupMode mode = LookupMode::Forward;
    Eigen::MatrixXd Q;
    Eigen::MatrixXd P;
    Eigen::MatrixXd D_L;
    Eigen::MatrixXd G_s;
};

LiftedSystem build_lifted(const SystemMatrices& sys, const PathSchedule& sched, const std::vector<MaskVector>& masks,
                          const MeasurementKind& kind, const VoxelGridSpec& vspec, LookupMode mode);

/// First line "rows,cols", then one row per line with 17 significant digits.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(std::istream& in);

} // namespace pbf
