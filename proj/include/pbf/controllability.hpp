#pragma once

#include "pbf/lifted.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace pbf {

struct Theorem1Result {
    double det = 0.0;           // product of the diagonal (may under/overflow for long layers)
    double log10_abs_det = 0.0; // sum of log10 |d_jj|; -inf when singular
    bool full_rank = false;
    double min_abs_diag = 0.0;
    double tolerance = 0.0;
};

/// Determinant of a lower-triangular D_L from its diagonal; rank test on the diagonal.
Theorem1Result check_theorem1(const Eigen::MatrixXd& D_L);

struct RankResult {
    Eigen::Index rank = 0;
    double sigma_max = 0.0;
    double tolerance = 0.0; // max(rows, cols) * eps * sigma_max
};

RankResult numerical_rank(const Eigen::MatrixXd& M);

struct OutputControllability {
    Eigen::MatrixXd M;
    RankResult rank;
    bool full_row_rank = false;
};

/**
 * Output-controllability matrix over layers 0..l1:
 * [C_L Phi(l1,l1) B_L(l1-1) | C_L Phi(l1,l1-1) B_L(l1-2) | ... | C_L Phi(l1,1) B_L(0) | D_L].
 * a_l[l] and b_l[l] hold A_L(l) and B_L(l).
 */
OutputControllability output_controllability_matrix(const Eigen::MatrixXd& C_L, const std::vector<Eigen::MatrixXd>& a_l,
                                                    const std::vector<Eigen::MatrixXd>& b_l, const Eigen::MatrixXd& D_L,
                                                    int l1);

struct DominanceResult {
    bool dominant = false;
    double margin = 0.0; // min over rows of |m_ii| - sum_{j != i} |m_ij|
    Eigen::Index worst_row = 0;
};

DominanceResult is_strictly_diag_dominant(const Eigen::MatrixXd& M);

bool is_nonnegative(const Eigen::MatrixXd& M);

struct Theorem3Result {
    bool satisfied = false; // D_L nonnegative and strictly diagonally dominant
    bool dl_nonnegative = false;
    DominanceResult dl_dominance;
    DominanceResult gs_dominance;
    Eigen::MatrixXd G_s;
};

/**
 * Sufficient condition for spatial output controllability. Only stated for
 * the forward look-up; a backward mode raises PreconditionError. When the
 * hypothesis holds the resulting G_s is checked for dominance as well and a
 * violation raises std::logic_error.
 */
Theorem3Result check_theorem3(const Eigen::MatrixXd& D_L, LookupMode mode, const SampleSets& sets);

struct FastCoolingResult {
    double worst_ratio = 0.0; // max over i, j of d_{i,j-1} / d_{i,j}
    bool implies_dominance = false;
};

FastCoolingResult fast_cooling_ratio(const Eigen::MatrixXd& D_L);

struct ControllabilityReport {
    int layer = 0;
    int n_t = 0;
    int n_s = 0;
    double det_DL = 0.0;
    double log10_abs_det_DL = 0.0;
    bool DL_full_rank = false;
    bool Gs_full_row_rank = false;
    Eigen::Index Gs_rank = 0;
    double Gs_rank_tolerance = 0.0;
    bool DL_nonnegative = false;
    bool DL_strictly_diag_dominant = false;
    double DL_dominance_margin = 0.0;
    bool Gs_strictly_diag_dominant = false;
    double Gs_dominance_margin = 0.0;
    double Gs_solve_residual = 0.0;
    double worst_decay_ratio = 0.0;
    bool decay_ratio_implies_dominance = false;
    bool theorem3_satisfied = false;
    std::string p_mode;
    std::string measurement; // output functional D_L was built with

    /// Throws std::logic_error if theorem3 => Gs dominant => Gs full row rank is broken.
    void assert_chain() const;
    /// key=value lines in a fixed order.
    std::string to_text() const;
};

ControllabilityReport analyze(const LiftedSystem& lifted, int layer);

} // namespace pbf
