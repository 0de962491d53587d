#include "pbf/lifted.hpp"

#include "pbf/error.hpp"
#include "pbf/io.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

namespace pbf {

std::string to_string(LookupMode m) { return m == LookupMode::Forward ? "forward" : "backward"; }

LookupMode parse_lookup_mode(const std::string& s) {
    if (s == "forward")
        return LookupMode::Forward;
    if (s == "backward")
        return LookupMode::Backward;
    throw ArgumentError("unknown look-up mode '" + s + "' (forward, backward)");
}

Eigen::MatrixXd build_Q(const SampleSets& sets, int n_t) {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sets.size()), n_t);
    for (std::size_t v = 0; v < sets.size(); ++v) {
        std::vector<int> in_range;
        for (int n : sets.samples[v])
            if (n >= 1 && n <= n_t)
                in_range.push_back(n);
        if (in_range.empty())
            throw PreconditionError("voxel " + std::to_string(sets.voxel_ids[v]) +
                                    " holds no output sample; its averaging row would be empty");
        const double w = 1.0 / static_cast<double>(in_range.size());
        for (int n : in_range)
            Q(static_cast<Eigen::Index>(v), n - 1) = w;
    }
    return Q;
}

Eigen::MatrixXd build_P(const SampleSets& sets, int n_t, LookupMode mode) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n_t, static_cast<Eigen::Index>(sets.size()));
    const int shift = mode == LookupMode::Backward ? 1 : 0;
    for (std::size_t v = 0; v < sets.size(); ++v)
        for (int n : sets.samples[v]) {
            const int row = n + shift; // 1-based row i with (i-1) in S or i in S
            if (row >= 1 && row <= n_t)
                P(row - 1, static_cast<Eigen::Index>(v)) = 1.0;
        }
    return P;
}

namespace {

void require_linear(const MeasurementKind& kind) {
    if (!kind.linear())
        throw UnsupportedMeasurementError(to_string(kind.type) +
                                          " depends on the state; the lifted gain needs a linear measurement");
}

void check_masks(const PathSchedule& sched, const std::vector<MaskVector>& masks) {
    if (static_cast<int>(masks.size()) != sched.mesh_steps())
        throw DimensionError("mask sequence does not cover the schedule");
}

// Propagates a unit input held during sample `col` (0-based); visit(n, x) is
// called after every later sample n (1-based) until `last`.
template <class Visit>
void propagate_pulse(const SystemMatrices& sys, const PathSchedule& sched, const std::vector<MaskVector>& masks,
                     int col, int last, Visit&& visit) {
    const int k = sched.substeps;
    const auto size = static_cast<Eigen::Index>(sys.mesh.state_size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(size);
    Eigen::VectorXd y(size);
    for (int s = 0; s < k; ++s) {
        sys.apply(x, y);
        for (const auto& [i, w] : masks[static_cast<std::size_t>(col) * k + s])
            y[static_cast<Eigen::Index>(i)] += sys.input_gain * w * 1.0;
        x.swap(y);
    }
    visit(col + 1, x);
    for (int n = col + 2; n <= last; ++n) {
        for (int s = 0; s < k; ++s) {
            sys.apply(x, y);
            x.swap(y);
        }
        visit(n, x);
    }
}

bool pulse_is_empty(const PathSchedule& sched, const std::vector<MaskVector>& masks, int col) {
    const int k = sched.substeps;
    for (int s = 0; s < k; ++s)
        if (!masks[static_cast<std::size_t>(col) * k + s].empty())
            return false;
    return true;
}

} // namespace

Eigen::MatrixXd build_DL(const SystemMatrices& sys, const PathSchedule& sched, const std::vector<MaskVector>& masks,
                         const MeasurementKind& kind, unsigned threads) {
    require_linear(kind);
    check_masks(sched, masks);
    const int n_t = sched.sample_count();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n_t, n_t);
    auto column = [&](int j) {
        if (pulse_is_empty(sched, masks, j))
            return;
        propagate_pulse(sys, sched, masks, j, n_t,
                        [&](int n, const Eigen::VectorXd& x) { D(n - 1, j) = measure(kind, n, sched, sys.mesh, x); });
    };
    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max(1, n_t)));
    if (workers <= 1) {
        for (int j = 0; j < n_t; ++j)
            column(j);
        return D;
    }
    // each worker owns a strided set of columns, so writes never overlap
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (int j = static_cast<int>(w); j < n_t; j += static_cast<int>(workers))
                column(j);
        });
    for (auto& t : pool)
        t.join();
    return D;
}

Eigen::MatrixXd build_CL(const SystemMatrices& sys, const PathSchedule& sched, const MeasurementKind& kind) {
    require_linear(kind);
    const int n_t = sched.sample_count();
    const int k = sched.substeps;
    const SparseMatrix At = sys.A.transpose();
    Eigen::MatrixXd C(n_t, static_cast<Eigen::Index>(sys.mesh.state_size()));
    for (int n = 1; n <= n_t; ++n) {
        Eigen::VectorXd w = measurement_vector(kind, n, sched, sys.mesh);
        for (int s = 0; s < n * k; ++s)
            w = At * w;
        C.row(n - 1) = w.transpose();
    }
    return C;
}

Eigen::MatrixXd input_to_final_state(const SystemMatrices& sys, const PathSchedule& sched,
                                     const std::vector<MaskVector>& masks) {
    check_masks(sched, masks);
    const int n_t = sched.sample_count();
    Eigen::MatrixXd Bt = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sys.mesh.state_size()), n_t);
    for (int j = 0; j < n_t; ++j)
        propagate_pulse(sys, sched, masks, j, n_t, [&](int n, const Eigen::VectorXd& x) {
            if (n == n_t)
                Bt.col(j) = x;
        });
    return Bt;
}

LayerTransition build_layer_transition(const SystemMatrices& sys, const PathSchedule& sched,
                                       const std::vector<MaskVector>& masks,
                                       const std::optional<SparseMatrix>& recoat) {
    const auto n = static_cast<Eigen::Index>(sys.mesh.state_size());
    const int n_t = sched.sample_count();
    LayerTransition t{SparseMatrix(n, n), SparseMatrix(n, n_t)};
    if (!recoat)
        return t;
    if (recoat->rows() != n || recoat->cols() != n)
        throw DimensionError("recoat operator does not match mesh");
    const SparseMatrix shift = shift_matrix(sys.mesh);
    Eigen::MatrixXd M = Eigen::MatrixXd(shift * (*recoat));
    const Eigen::MatrixXd shifted_recoat = M;
    for (int s = 0; s < n_t * sched.substeps; ++s)
        M = M * sys.A;
    t.A_L = M.sparseView();
    t.B_L = (shifted_recoat * input_to_final_state(sys, sched, masks)).sparseView();
    return t;
}

Eigen::MatrixXd state_transition(const std::vector<Eigen::MatrixXd>& a_l, int l1, int l2) {
    if (l1 < l2)
        throw ArgumentError("state transition needs l1 >= l2");
    if (a_l.empty())
        throw ArgumentError("state transition needs at least one layer map");
    if (l2 < 0 || l1 > static_cast<int>(a_l.size()))
        throw RangeError("state transition layers outside the supplied sequence");
    Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(a_l.front().rows(), a_l.front().cols());
    for (int l = l2; l < l1; ++l)
        phi = a_l[static_cast<std::size_t>(l)] * phi;
    return phi;
}

Eigen::MatrixXd build_Gs(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& D_L, const Eigen::MatrixXd& P) {
    if (Q.cols() != D_L.rows() || D_L.cols() != P.rows())
        throw DimensionError("G_s: Q is " + std::to_string(Q.rows()) + "x" + std::to_string(Q.cols()) + ", D_L " +
                             std::to_string(D_L.rows()) + "x" + std::to_string(D_L.cols()) + ", P " +
                             std::to_string(P.rows()) + "x" + std::to_string(P.cols()));
    return Q * D_L * P;
}

LiftedSystem build_lifted(const SystemMatrices& sys, const PathSchedule& sched, const std::vector<MaskVector>& masks,
                          const MeasurementKind& kind, const VoxelGridSpec& vspec, LookupMode mode) {
    LiftedSystem ls;
    ls.mode = mode;
    ls.sets = register_samples(sched, vspec).with_outputs();
    const int n_t = sched.sample_count();
    ls.Q = build_Q(ls.sets, n_t);
    ls.P = build_P(ls.sets, n_t, mode);
    ls.D_L = build_DL(sys, sched, masks, kind);
    ls.G_s = build_Gs(ls.Q, ls.D_L, ls.P);
    return ls;
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
    out << m.rows() << ',' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0)
                out << ',';
            out << format_number(m(i, j));
        }
        out << '\n';
    }
}

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(1, "matrix CSV is empty");
    long rows = 0, cols = 0;
    char comma = 0;
    std::istringstream head(line);
    if (!(head >> rows >> comma >> cols) || comma != ',' || rows < 0 || cols < 0)
        throw ParseError(1, "matrix CSV header must be 'rows,cols'");
    Eigen::MatrixXd m(rows, cols);
    for (long i = 0; i < rows; ++i) {
        if (!std::getline(in, line))
            throw ParseError(static_cast<int>(i + 2), "matrix CSV ends early");
        std::istringstream row(line);
        std::string cell;
        for (long j = 0; j < cols; ++j) {
            if (!std::getline(row, cell, ','))
                throw ParseError(static_cast<int>(i + 2), "matrix CSV row is short");
            m(i, j) = std::stod(cell);
        }
    }
    return m;
}

} // namespace pbf
