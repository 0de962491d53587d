// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "pbf/app.hpp"
#include "pbf/config.hpp"
#include "pbf/controllability.hpp"
#include "pbf/lifted.hpp"
#include "pbf/simulate.hpp"

#include "support.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

using namespace pbf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Stopwatch {
  public:
    double seconds() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  private:
    using Clock = std::chrono::steady_clock;
    Clock::time_point start_ = Clock::now();
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

fs::path source_dir() { return fs::path(PBF_SOURCE_DIR); }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("pbf_acceptance_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    return run_cli(args, out, err);
}

// 1. Serpentine fixture: exact averaging and backward look-up operators.
Outcome serpentine_operators() {
    Stopwatch clock;
    const double t = 1.0 / 3.0, h = 0.5;
    Eigen::MatrixXd Q_expected(4, 10);
    Q_expected << t, 0, 0, 0, t, t, 0, 0, 0, 0, //
        0, t, t, t, 0, 0, 0, 0, 0, 0,           //
        0, 0, 0, 0, 0, 0, h, h, 0, 0,           //
        0, 0, 0, 0, 0, 0, 0, 0, h, h;
    Eigen::MatrixXd P_expected(10, 4);
    P_expected << 1, 0, 0, 0, //
        1, 0, 0, 0,           //
        0, 1, 0, 0,           //
        0, 1, 0, 0,           //
        0, 1, 0, 0,           //
        1, 0, 0, 0,           //
        1, 0, 0, 0,           //
        0, 0, 1, 0,           //
        0, 0, 1, 0,           //
        0, 0, 0, 1;

    const testing::Serpentine6x5 ex;
    const PathSchedule sched = generate_raster(ex.geom, ex.mesh, 1, ex.raster);
    const SampleSets sets = register_samples(sched, ex.voxels);
    const bool lib_q = build_Q(sets, sched.sample_count()) == Q_expected;
    const bool lib_p = build_P(sets, sched.sample_count(), LookupMode::Backward) == P_expected;
    const double lib_time = clock.seconds();

    // same fixture through the command line and the CSV files
    const fs::path out = scratch("serpentine");
    bool csv_ok = cli({"build-matrices", (source_dir() / "configs/serpentine_6x5.cfg").string(), "--layer", "1", "-o",
                       out.string()}) == exit_ok;
    if (csv_ok) {
        std::ifstream q(out / "Q.csv"), p(out / "P.csv");
        csv_ok = read_matrix_csv(q) == Q_expected && read_matrix_csv(p) == P_expected;
    }
    fs::remove_all(out);
    const double elapsed = clock.seconds();
    Outcome o;
    o.pass = lib_q && lib_p && csv_ok && elapsed < 1.0;
    o.detail = std::string("Q ") + (lib_q ? "exact" : "MISMATCH") + ", backward P " + (lib_p ? "exact" : "MISMATCH") +
               ", CLI CSVs " + (csv_ok ? "exact" : "MISMATCH") + fmt(", library %.3f s", lib_time) +
               fmt(", total %.3f s (limit 1 s)", elapsed);
    return o;
}

// 2. D_L columns and products against direct simulation.
Outcome lifted_oracle() {
    Stopwatch clock;
    const MeshSpec mesh{20, 10, 3, 1e-4, 1e-4, 1e-4, 1e-4};
    const PartGeometry geom = make_rectangle(18, 8, 3, 1);
    const MaterialParams mat{33.5, 6e-6, 1.0};
    const SystemMatrices sys = build_system(mesh, mat, geom, 3);
    const PathSchedule sched = generate_raster(geom, mesh, 3, RasterParams{1e-4, 1.0, 0.0, 0.0, 1});
    const auto masks =
        mask_sequence(sched, geom.layer(3), mesh, BeamProfile::kernel({{-1, 0, 1}, {0, 0, 6}, {1, 0, 1}}));
    const int n_t = sched.sample_count();
    const ThermalState zero{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.state_size())), 3};

    double col_err = 0.0, prod_err = 0.0;
    testing::Rng rng(2024);
    for (const auto& kind : {MeasurementKind::max_temp(), MeasurementKind::surface_sum()}) {
        const Eigen::MatrixXd D = build_DL(sys, sched, masks, kind, 1);
        for (int j = 0; j < n_t; ++j) {
            Eigen::VectorXd pulse = Eigen::VectorXd::Zero(n_t);
            pulse[j] = 1.0;
            const LayerResponse r = simulate_layer(zero, sched, masks, pulse, sys, kind);
            col_err = std::max(col_err, (D.col(j) - r.outputs).cwiseAbs().maxCoeff());
        }
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd u(n_t);
            for (int i = 0; i < n_t; ++i)
                u[i] = testing::uniform_real(rng, 0.0, 400.0);
            const LayerResponse r = simulate_layer(zero, sched, masks, u, sys, kind);
            prod_err = std::max(prod_err, (D * u - r.outputs).norm() / r.outputs.norm());
        }
    }
    const double elapsed = clock.seconds();
    Outcome o;
    o.pass = n_t <= 200 && col_err <= 1e-10 && prod_err <= 1e-9 && elapsed < 30.0;
    o.detail = "N_t=" + std::to_string(n_t) + fmt(", max column error %.2e (limit 1e-10)", col_err) +
               fmt(", max relative product error %.2e (limit 1e-9)", prod_err) + fmt(", %.2f s (limit 30 s)", elapsed);
    return o;
}

// 3. Conservation, nonnegativity and dissipation with zero input.
Outcome conservation() {
    const MeshSpec mesh{24, 16, 4, 1e-4, 1e-4, 1e-4, 2e-4};
    const PartGeometry geom = make_prism(20, 12, 0.5, 6, 2);
    const MaterialParams mat{33.5, 6e-6, 1.0};
    testing::Rng rng(99);
    Eigen::VectorXd x0(static_cast<Eigen::Index>(mesh.state_size()));
    for (Eigen::Index i = 0; i < x0.size(); ++i)
        x0[i] = testing::uniform_real(rng, 0.0, 1000.0);

    BoundaryOptions adiabatic;
    adiabatic.substrate_dirichlet = false;
    const SystemMatrices closed = build_system(mesh, mat, geom, 5, adiabatic);
    const double s0 = x0.sum();
    double drift = 0.0, min_t = x0.minCoeff();
    Eigen::VectorXd x = x0, y;
    for (int n = 0; n < 1000; ++n) {
        closed.apply(x, y);
        x.swap(y);
        drift = std::max(drift, std::abs(x.sum() - s0) / s0);
        min_t = std::min(min_t, x.minCoeff());
    }

    const SystemMatrices grounded = build_system(mesh, mat, geom, 5, BoundaryOptions{});
    bool monotone = true;
    x = x0;
    double prev_sum = x.sum(), prev_max = x.maxCoeff();
    for (int n = 0; n < 1000; ++n) {
        grounded.apply(x, y);
        x.swap(y);
        min_t = std::min(min_t, x.minCoeff());
        monotone = monotone && x.sum() <= prev_sum && x.maxCoeff() <= prev_max * (1.0 + 1e-15);
        prev_sum = x.sum();
        prev_max = x.maxCoeff();
    }
    const double lost = 1.0 - prev_sum / s0;
    Outcome o;
    o.pass = drift <= 1e-12 && min_t >= 0.0 && monotone && lost > 0.0;
    o.detail = fmt("adiabatic sum drift %.2e over 1000 steps (limit 1e-12)", drift) +
               fmt(", min temperature %.3g", min_t) + ", grounded run " +
               (monotone ? "monotonically dissipative" : "NOT monotone") + fmt(" (%.1f%% of heat removed)", 100 * lost);
    return o;
}

// 4. One-dimensional rod against the cosine-series Green's function.
Outcome rod_diffusion() {
    const int n = 101;
    const double dx = 1e-4, alpha = 6e-6, lambda = 0.25;
    const double dt = lambda * dx * dx / alpha;
    const MeshSpec mesh{n, 1, 1, dx, 1.0, 1.0, dt};
    BoundaryOptions adiabatic;
    adiabatic.substrate_dirichlet = false;
    const SystemMatrices sys = build_system(mesh, MaterialParams{33.5, alpha, 1.0}, make_rectangle(n, 1, 1), 1, adiabatic);
    const int centre = n / 2;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n), y;
    x[centre] = 1.0;
    const int steps = 100;
    for (int s = 0; s < steps; ++s) {
        sys.apply(x, y);
        x.swap(y);
    }
    // heat content dx concentrated at the centre element, insulated rod of length n dx
    const double len = n * dx, t = steps * dt, x0 = (centre + 0.5) * dx;
    Eigen::VectorXd exact(n);
    for (int i = 0; i < n; ++i) {
        const double xi = (i + 0.5) * dx;
        double sum = 1.0;
        for (int m = 1; m <= 4000; ++m) {
            const double k = m * std::numbers::pi / len;
            sum += 2.0 * std::cos(k * xi) * std::cos(k * x0) * std::exp(-alpha * k * k * t);
        }
        exact[i] = sum / len * dx;
    }
    const double err = (x - exact).norm() / exact.norm();
    Outcome o;
    o.pass = err < 0.01;
    o.detail = fmt("relative L2 error %.3e at t = 100 dt", err) + fmt(" (limit 1e-2), lambda = %.2f", lambda);
    return o;
}

// 5. Randomised spatial-gain dominance and the homogeneous-solve bound.
Outcome theorem3_trials() {
    testing::Rng rng(1234567);
    int dominant = 0, invertible = 0, agree = 0;
    const int trials = 200;
    double worst_bound = 1e300;
    for (int trial = 0; trial < trials; ++trial) {
        const int n_t = testing::uniform_int(rng, 2, 80);
        const int n_s = testing::uniform_int(rng, 1, std::min(n_t, 20));
        const SampleSets sets = testing::random_partition(n_t, n_s, rng);
        const Eigen::MatrixXd D = testing::random_dominant_lower(n_t, rng);
        const Eigen::MatrixXd G = build_Gs(build_Q(sets, n_t), D, build_P(sets, n_t, LookupMode::Forward));

        double margin = 1e300;
        for (Eigen::Index i = 0; i < G.rows(); ++i)
            margin = std::min(margin, 2.0 * std::abs(G(i, i)) - G.row(i).cwiseAbs().sum());
        if (margin > 0.0)
            ++dominant;
        const Theorem3Result r = check_theorem3(D, LookupMode::Forward, sets);
        if (r.satisfied && r.gs_dominance.dominant)
            ++agree;

        // smallest |G w| over unit w is sigma_min; dominance bounds it below by margin / sqrt(n)
        const double sigma_min = Eigen::JacobiSVD<Eigen::MatrixXd>(G).singularValues().minCoeff();
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
        const double bound = margin / std::sqrt(static_cast<double>(n_s));
        if (sigma_min > 0.0 && sigma_min >= bound * (1.0 - 1e-9) && lu.rank() == n_s && lu.kernel().isZero())
            ++invertible;
        worst_bound = std::min(worst_bound, sigma_min / bound);
    }
    Outcome o;
    o.pass = dominant == trials && invertible == trials && agree == trials;
    o.detail = std::to_string(dominant) + "/" + std::to_string(trials) + " G_s strictly dominant, " +
               std::to_string(agree) + "/" + std::to_string(trials) + " library verdicts agree, " +
               std::to_string(invertible) + "/" + std::to_string(trials) + " homogeneous solves trivial" +
               fmt(" (min sigma_min / dominance bound %.2f)", worst_bound);
    return o;
}

// 6. Steel corner pulse at 2 kHz and the fast-cooling verdict on a 400 um-spaced scan.
Outcome fast_cooling() {
    const MaterialParams steel{33.5, 6e-6, 1.0};
    const int k = 8;
    const double d = 50e-6, dt = 0.5e-3 / k;
    const auto g = corner_pulse_decay(steel, MeshSpec{20, 20, 10, d, d, d, dt}, 6, k);
    const double ratio = g[1] / g[0];

    const MeshSpec mesh{40, 30, 3, d, d, d, dt};
    const PartGeometry geom = make_rectangle(40, 30, 3);
    const RasterParams raster{100e-6, 0.8, 90.0, 0.0, k};
    const SystemMatrices sys = build_system(mesh, steel, geom, 3);
    const PathSchedule sched = generate_raster(geom, mesh, 3, raster);
    const auto masks = mask_sequence(sched, geom.layer(3), mesh);
    const Eigen::MatrixXd D = build_DL(sys, sched, masks, MeasurementKind::max_temp(), 1);
    const SampleSets sets = register_samples(sched, VoxelGridSpec::covering(1, 1, 40, 30, 8, 8)).with_outputs();
    const Theorem3Result r = check_theorem3(D, LookupMode::Forward, sets);
    const double spacing = raster.speed * dt * k;

    Outcome o;
    o.pass = ratio < 0.5 && r.satisfied && std::abs(spacing - 400e-6) < 1e-12;
    o.detail = fmt("corner g(2)/g(1) = %.3f (limit 0.5)", ratio) + fmt(", sample spacing %.0f um", spacing * 1e6) +
               ", D_L " + std::to_string(D.rows()) + "x" + std::to_string(D.cols()) + " nonnegative=" +
               (r.dl_nonnegative ? "true" : "false") + fmt(" dominance margin %.3g K/W", r.dl_dominance.margin) +
               ", theorem3 " + (r.satisfied ? "satisfied" : "NOT satisfied");
    return o;
}

// 7. Linear-surrogate learning recursion on a constant rectangle.
Outcome linear_contraction() {
    PlantConfig plant;
    plant.mesh = MeshSpec{12, 9, 2, 1e-4, 1e-4, 1e-4, 2e-5};
    plant.material = MaterialParams{33.5, 6e-6, 0.3};
    plant.geometry = make_rectangle(12, 9, 9);
    plant.measurement = MeasurementKind::max_temp();
    plant.voxels = voxel_grid_for(plant.geometry, 3, 3);
    plant.p_mode = LookupMode::Forward;
    const RasterParams raster{2e-4, 2.5, 0.0, 0.0, 4};

    SilcConfig silc;
    silc.gamma = 0.2;
    silc.saturate = false;
    silc.control = false;
    const auto nominal = run_closed_loop(plant, raster, silc, 2);
    silc.reference = 1.25 * nominal.back().y_s.values.mean();
    silc.control = true;
    const int layers = plant.geometry.layer_count();
    const auto history = run_closed_loop(plant, raster, silc, layers);

    // every layer from the second on sees the same window, path and voxels
    const LayerSetup s = prepare_layer(plant, raster, 2);
    const int n_t = s.path.sample_count();
    const Eigen::MatrixXd G = build_Gs(build_Q(s.sets, n_t), build_DL(s.sys, s.path, s.masks, plant.measurement, 1),
                                       build_P(s.sets, n_t, LookupMode::Forward));
    const double rho = convergence_margin(G, silc.gamma);
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(G.rows(), G.cols()) - silc.gamma * G;

    double worst = 0.0;
    bool monotone = true;
    for (std::size_t l = 1; l + 1 < history.size(); ++l) {
        const Eigen::VectorXd& e = history[l].e_s.values;
        const Eigen::VectorXd& next = history[l + 1].e_s.values;
        worst = std::max(worst, (next - M * e).norm() / next.norm());
        monotone = monotone && next.norm() < e.norm();
    }
    Outcome o;
    o.pass = rho < 1.0 && worst <= 1e-9 && monotone;
    o.detail = fmt("rho(I - 0.2 G_s) = %.3f", rho) + fmt(", recursion error %.2e (limit 1e-9)", worst) +
               fmt(", |e| %.3g", history[1].e_s.values.norm()) + fmt(" -> %.3g", history.back().e_s.values.norm()) +
               (monotone ? " decreasing every layer" : " NOT monotone");
    return o;
}

struct RegionRun {
    std::vector<LayerSummary> summaries;
};

RegionRun run_regions(const RunConfig& cfg, bool control) {
    const PlantConfig plant = cfg.plant();
    SilcConfig silc = cfg.silc;
    silc.control = control;
    RegionRun run;
    const double hatch_elements = cfg.raster.hatch / cfg.dx;
    run_closed_loop(plant, cfg.raster, silc, cfg.layers_to_run(plant.geometry), [&](const LayerRecord& rec) {
        const auto regions =
            classify_regions(rec.y_s.ids, plant.voxels, cfg.regions, plant.geometry.layer(rec.layer), hatch_elements);
        run.summaries.push_back(summarize(rec, regions));
    });
    return run;
}

// 8. Prism: hot open-loop edges, region means pulled to the reference.
Outcome prism_experiment() {
    Stopwatch clock;
    const RunConfig cfg = load_config(source_dir() / "configs/prism.cfg");
    const RegionRun open = run_regions(cfg, false);
    const RegionRun closed = run_regions(cfg, true);
    const LayerSummary& ol = open.summaries.back();
    const LayerSummary& cl = closed.summaries.back();
    const double ref = cfg.silc.reference, nominal = cfg.silc.u_nominal;
    const int controlled = cl.layer - cfg.silc.start_layer;
    auto within = [&](const RegionStats& r) { return r.count > 0 && std::abs(r.mean_output - ref) <= 0.1 * ref; };
    const bool hot_edges = ol.edge.mean_output >= 1.1 * ol.center.mean_output;
    const bool tracked = within(cl.center) && within(cl.edge) && within(cl.corner);
    const bool lowered = cl.edge.mean_power < nominal && cl.corner.mean_power < nominal;
    const double elapsed = clock.seconds();

    Outcome o;
    o.pass = hot_edges && tracked && lowered && controlled >= 10 && elapsed < 300.0;
    o.detail = fmt("open loop layer %.0f: ", ol.layer) + fmt("edge %.1f", ol.edge.mean_output) +
               fmt(" vs center %.1f", ol.center.mean_output) +
               fmt(" (+%.0f%%, need 10%%)", 100.0 * (ol.edge.mean_output / ol.center.mean_output - 1.0)) +
               fmt("; after %.0f controlled layers: ", controlled) + fmt("center %.1f", cl.center.mean_output) +
               fmt(" edge %.1f", cl.edge.mean_output) + fmt(" corner %.1f", cl.corner.mean_output) +
               fmt(" (reference %.0f +/-10%%)", ref) + fmt(", powers edge %.0f W", cl.edge.mean_power) +
               fmt(" corner %.0f W", cl.corner.mean_power) + fmt(" center %.0f W", cl.center.mean_power) +
               fmt(" (nominal %.0f W)", nominal) + fmt(", %.0f s (limit 300 s)", elapsed);
    return o;
}

// 9. Rotating half ellipsoid: edge error over layers 15-60, closed against open loop.
Outcome ellipsoid_experiment() {
    Stopwatch clock;
    const RunConfig cfg = load_config(source_dir() / "configs/half_ellipsoid.cfg");
    const RegionRun open = run_regions(cfg, false);
    const RegionRun closed = run_regions(cfg, true);
    auto mean_edge_error = [](const RegionRun& r) {
        double sum = 0.0;
        int n = 0;
        for (const auto& s : r.summaries)
            if (s.layer >= 15 && s.layer <= 60 && s.edge.count > 0) {
                sum += s.edge.mean_abs_error;
                ++n;
            }
        return n > 0 ? sum / n : 0.0;
    };
    const double eo = mean_edge_error(open), ec = mean_edge_error(closed);
    const double ratio = ec / eo;
    const double elapsed = clock.seconds();
    Outcome o;
    o.pass = closed.summaries.size() >= 60 && eo > 0.0 && ratio <= 0.5 && elapsed < 600.0 &&
             cfg.raster.rotation_deg == 67.0 && cfg.silc.gamma == 0.25;
    o.detail = fmt("mean |edge error| layers 15-60: open %.2f", eo) + fmt(", closed %.2f", ec) +
               fmt(", ratio %.3f (limit 0.5)", ratio) + fmt(", %.0f s (limit 600 s)", elapsed);
    return o;
}

// 10. Every subcommand twice with the same config gives identical files.
Outcome determinism() {
    const fs::path base = scratch("determinism");
    const fs::path cfg = base / "small.cfg";
    std::ofstream(cfg) << "geometry=prism\nprism_length=8e-4\nprism_width=6e-4\nlayers=4\nmargin=1\n"
                          "dx=1e-4\ndy=1e-4\ndz=1e-4\ndt=2e-5\nwindow_layers=2\nabsorptivity=0.3\n"
                          "hatch=2e-4\nspeed=2.5\nsubsteps=4\nbeam=gaussian\nbeam_sigma=1e-4\nvoxel_size=3e-4\n"
                          "measurement=meltpool_area\nthreshold=2\npixels_per_element=2\nreference=5\n"
                          "rotation_deg=67\nstart_layer=2\nthreads=2\npulse_samples=5\npulse_extent=8\npulse_depth=4\n";
    const std::string serpentine = (source_dir() / "configs/serpentine_6x5.cfg").string();
    const std::vector<std::vector<std::string>> commands{
        {"simulate-openloop", cfg.string()},
        {"simulate-silc", cfg.string()},
        {"build-matrices", cfg.string(), "--layer", "3"},
        {"build-matrices", serpentine, "--layer", "1"},
        {"check-controllability", cfg.string(), "--layer", "3"},
        {"pulse-decay", cfg.string()},
    };
    int identical = 0, files = 0;
    std::string failed;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::vector<fs::path> dirs;
        bool ran = true;
        for (int rep = 0; rep < 2; ++rep) {
            dirs.push_back(base / (std::to_string(c) + "_" + std::to_string(rep)));
            auto args = commands[c];
            args.insert(args.end(), {"-o", dirs.back().string()});
            ran = ran && cli(args) == exit_ok;
        }
        bool same = ran;
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            const fs::path other = dirs[1] / entry.path().filename();
            std::ifstream a(entry.path(), std::ios::binary), b(other, std::ios::binary);
            std::ostringstream sa, sb;
            sa << a.rdbuf();
            sb << b.rdbuf();
            same = same && fs::exists(other) && sa.str() == sb.str();
            ++files;
        }
        if (same)
            ++identical;
        else
            failed += " " + commands[c][0];
    }
    fs::remove_all(base);
    Outcome o;
    o.pass = identical == static_cast<int>(commands.size());
    o.detail = std::to_string(identical) + "/" + std::to_string(commands.size()) + " repeated runs byte-identical (" +
               std::to_string(files) + " files compared)" + (failed.empty() ? "" : ", differing:" + failed);
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"serpentine fixture operators", serpentine_operators},
        {"lifted gain vs simulation", lifted_oracle},
        {"conservation and maximum principle", conservation},
        {"rod vs analytic series", rod_diffusion},
        {"spatial gain dominance trials", theorem3_trials},
        {"steel fast cooling", fast_cooling},
        {"linear-surrogate contraction", linear_contraction},
        {"prism closed loop", prism_experiment},
        {"rotating half ellipsoid", ellipsoid_experiment},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = Outcome{false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
