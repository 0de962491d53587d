#include "pbf/controllability.hpp"

#include "pbf/error.hpp"
#include "pbf/io.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pbf {

Theorem1Result check_theorem1(const Eigen::MatrixXd& D_L) {
    if (D_L.rows() != D_L.cols())
        throw DimensionError("D_L must be square");
    Theorem1Result r;
    const Eigen::Index n = D_L.rows();
    if (n == 0) {
        r.det = 1.0;
        r.full_rank = true;
        return r;
    }
    const Eigen::VectorXd diag = D_L.diagonal();
    const double max_abs = diag.cwiseAbs().maxCoeff();
    r.min_abs_diag = diag.cwiseAbs().minCoeff();
    r.tolerance = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * max_abs;
    r.det = 1.0;
    r.log10_abs_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        r.det *= diag[i];
        r.log10_abs_det += std::log10(std::abs(diag[i]));
    }
    r.full_rank = r.min_abs_diag > r.tolerance;
    return r;
}

RankResult numerical_rank(const Eigen::MatrixXd& M) {
    RankResult r;
    if (M.size() == 0)
        return r;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const Eigen::VectorXd& sv = svd.singularValues();
    r.sigma_max = sv.size() > 0 ? sv[0] : 0.0;
    r.tolerance = static_cast<double>(std::max(M.rows(), M.cols())) * std::numeric_limits<double>::epsilon() *
                  r.sigma_max;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > r.tolerance)
            ++r.rank;
    return r;
}

OutputControllability output_controllability_matrix(const Eigen::MatrixXd& C_L, const std::vector<Eigen::MatrixXd>& a_l,
                                                    const std::vector<Eigen::MatrixXd>& b_l, const Eigen::MatrixXd& D_L,
                                                    int l1) {
    if (l1 < 1)
        throw ArgumentError("output controllability needs l1 >= 1");
    if (static_cast<int>(b_l.size()) < l1 || (l1 > 1 && static_cast<int>(a_l.size()) < l1))
        throw DimensionError("layer-map sequences shorter than l1");
    if (C_L.rows() != D_L.rows())
        throw DimensionError("C_L and D_L row counts differ");
    Eigen::Index cols = D_L.cols();
    for (int r = 0; r < l1; ++r)
        cols += b_l[static_cast<std::size_t>(r)].cols();
    OutputControllability out;
    out.M.resize(C_L.rows(), cols);
    Eigen::Index at = 0;
    for (int r = l1 - 1; r >= 0; --r) {
        const auto& B = b_l[static_cast<std::size_t>(r)];
        Eigen::MatrixXd block;
        if (r + 1 == l1) {
            block = C_L * B;
        } else {
            block = C_L * state_transition(a_l, l1, r + 1) * B;
        }
        if (block.rows() != out.M.rows())
            throw DimensionError("layer-map dimensions do not chain");
        out.M.middleCols(at, block.cols()) = block;
        at += block.cols();
    }
    out.M.middleCols(at, D_L.cols()) = D_L;
    out.rank = numerical_rank(out.M);
    out.full_row_rank = out.rank.rank == out.M.rows();
    return out;
}

DominanceResult is_strictly_diag_dominant(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols())
        throw DimensionError("dominance test needs a square matrix");
    DominanceResult r;
    r.margin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        const double off = M.row(i).cwiseAbs().sum() - std::abs(M(i, i));
        const double m = std::abs(M(i, i)) - off;
        if (m < r.margin) {
            r.margin = m;
            r.worst_row = i;
        }
    }
    if (M.rows() == 0)
        r.margin = 0.0;
    r.dominant = M.rows() > 0 && r.margin > 0.0;
    return r;
}

bool is_nonnegative(const Eigen::MatrixXd& M) { return M.size() == 0 || M.minCoeff() >= 0.0; }

Theorem3Result check_theorem3(const Eigen::MatrixXd& D_L, LookupMode mode, const SampleSets& sets) {
    if (mode != LookupMode::Forward)
        throw PreconditionError("the fast-cooling condition is stated for the one-step-forward look-up only");
    if (D_L.rows() != D_L.cols() || D_L.rows() != sets.n_t)
        throw DimensionError("D_L does not match the sample sets");
    Theorem3Result r;
    r.dl_nonnegative = is_nonnegative(D_L);
    r.dl_dominance = is_strictly_diag_dominant(D_L);
    r.satisfied = r.dl_nonnegative && r.dl_dominance.dominant;
    const SampleSets used = sets.with_outputs();
    r.G_s = build_Gs(build_Q(used, sets.n_t), D_L, build_P(used, sets.n_t, mode));
    r.gs_dominance = is_strictly_diag_dominant(r.G_s);
    if (r.satisfied && !r.gs_dominance.dominant) {
        std::ostringstream msg;
        msg << "fast-cooling hypothesis holds but G_s row " << r.gs_dominance.worst_row
            << " is not strictly dominant (margin " << r.gs_dominance.margin << ")";
        throw std::logic_error(msg.str());
    }
    return r;
}

FastCoolingResult fast_cooling_ratio(const Eigen::MatrixXd& D_L) {
    FastCoolingResult r;
    for (Eigen::Index i = 0; i < D_L.rows(); ++i)
        for (Eigen::Index j = 1; j <= i && j < D_L.cols(); ++j)
            if (D_L(i, j) != 0.0)
                r.worst_ratio = std::max(r.worst_ratio, D_L(i, j - 1) / D_L(i, j));
            else if (D_L(i, j - 1) != 0.0)
                r.worst_ratio = std::numeric_limits<double>::infinity();
    r.implies_dominance = r.worst_ratio < 0.5;
    return r;
}

void ControllabilityReport::assert_chain() const {
    if (theorem3_satisfied && !Gs_strictly_diag_dominant)
        throw std::logic_error("report chain broken: theorem3_satisfied without G_s dominance");
    if (Gs_strictly_diag_dominant && !Gs_full_row_rank)
        throw std::logic_error("report chain broken: dominant G_s reported rank deficient");
}

std::string ControllabilityReport::to_text() const {
    std::ostringstream o;
    auto b = [](bool v) { return v ? "true" : "false"; };
    o << "layer=" << layer << '\n'
      << "n_t=" << n_t << '\n'
      << "n_s=" << n_s << '\n'
      << "p_mode=" << p_mode << '\n'
      << "measurement=" << measurement << '\n'
      << "det_DL=" << format_number(det_DL) << '\n'
      << "log10_abs_det_DL=" << format_number(log10_abs_det_DL) << '\n'
      << "DL_full_rank=" << b(DL_full_rank) << '\n'
      << "DL_nonnegative=" << b(DL_nonnegative) << '\n'
      << "DL_strictly_diag_dominant=" << b(DL_strictly_diag_dominant) << '\n'
      << "DL_dominance_margin=" << format_number(DL_dominance_margin) << '\n'
      << "Gs_rank=" << Gs_rank << '\n'
      << "Gs_rank_tolerance=" << format_number(Gs_rank_tolerance) << '\n'
      << "Gs_full_row_rank=" << b(Gs_full_row_rank) << '\n'
      << "Gs_strictly_diag_dominant=" << b(Gs_strictly_diag_dominant) << '\n'
      << "Gs_dominance_margin=" << format_number(Gs_dominance_margin) << '\n'
      << "Gs_homogeneous_residual=" << format_number(Gs_solve_residual) << '\n'
      << "worst_decay_ratio=" << format_number(worst_decay_ratio) << '\n'
      << "decay_ratio_implies_dominance=" << b(decay_ratio_implies_dominance) << '\n'
      << "theorem3_satisfied=" << b(theorem3_satisfied) << '\n';
    return o.str();
}

ControllabilityReport analyze(const LiftedSystem& lifted, int layer) {
    ControllabilityReport rep;
    rep.layer = layer;
    rep.n_t = static_cast<int>(lifted.D_L.rows());
    rep.n_s = static_cast<int>(lifted.sets.size());
    rep.p_mode = to_string(lifted.mode);

    const Theorem1Result t1 = check_theorem1(lifted.D_L);
    rep.det_DL = t1.det;
    rep.log10_abs_det_DL = t1.log10_abs_det;
    rep.DL_full_rank = t1.full_rank;

    const RankResult rk = numerical_rank(lifted.G_s);
    rep.Gs_rank = rk.rank;
    rep.Gs_rank_tolerance = rk.tolerance;
    rep.Gs_full_row_rank = rk.rank == lifted.G_s.rows() && lifted.G_s.rows() > 0;
    if (lifted.G_s.size() > 0) {
        // smallest |G w| over unit vectors w: zero iff a nontrivial homogeneous solution exists
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(lifted.G_s);
        rep.Gs_solve_residual = svd.singularValues().minCoeff();
    }

    rep.DL_nonnegative = is_nonnegative(lifted.D_L);
    const DominanceResult dl = is_strictly_diag_dominant(lifted.D_L);
    rep.DL_strictly_diag_dominant = dl.dominant;
    rep.DL_dominance_margin = dl.margin;
    const DominanceResult gs = is_strictly_diag_dominant(lifted.G_s);
    rep.Gs_strictly_diag_dominant = gs.dominant;
    rep.Gs_dominance_margin = gs.margin;

    const FastCoolingResult fc = fast_cooling_ratio(lifted.D_L);
    rep.worst_decay_ratio = fc.worst_ratio;
    rep.decay_ratio_implies_dominance = fc.implies_dominance;

    if (lifted.mode == LookupMode::Forward)
        rep.theorem3_satisfied = check_theorem3(lifted.D_L, lifted.mode, lifted.sets).satisfied;
    rep.assert_chain();
    return rep;
}

} // namespace pbf
