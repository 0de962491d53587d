#include "pbf/app.hpp"

#include "pbf/config.hpp"
#include "pbf/controllability.hpp"
#include "pbf/error.hpp"
#include "pbf/io.hpp"
#include "pbf/simulate.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace fs = std::filesystem;

namespace pbf {

namespace {

struct Context {
    RunConfig cfg;
    fs::path out_dir;
    std::string command;
    std::ostringstream meta_extra;
};

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream f(path, mode);
    if (!f)
        throw ArgumentError("cannot write '" + path.string() + "'");
    return f;
}

Context load(const std::string& config_path, const std::string& output_override, const std::string& command) {
    Context c;
    c.cfg = load_config(config_path);
    c.command = command;
    c.out_dir = output_override.empty() ? fs::path(c.cfg.output_dir) : fs::path(output_override);
    fs::create_directories(c.out_dir);
    return c;
}

void write_meta(const Context& c) {
    auto f = open_output(c.out_dir / "meta");
    f << "toolkit_version=" << toolkit_version << '\n' << "command=" << c.command << '\n' << c.cfg.to_text()
      << c.meta_extra.str();
}

std::string layer_tag(int layer) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03d", layer);
    return buf;
}

// Voxel outputs as an image, top image row = highest voxel row; voxels without output stay black.
PgmScale write_layer_map(const fs::path& path, const LayerRecord& rec, const VoxelGridSpec& vspec) {
    std::vector<double> px(static_cast<std::size_t>(vspec.voxel_count()), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < rec.y_s.size(); ++i) {
        const VoxelCoord v = voxel_coord(rec.y_s.ids[i], vspec);
        px[static_cast<std::size_t>(vspec.m2 - v.vy) * vspec.m1 + (v.vx - 1)] =
            rec.y_s.values[static_cast<Eigen::Index>(i)];
    }
    auto f = open_output(path, std::ios::out | std::ios::binary);
    return write_pgm(f, vspec.m1, vspec.m2, px);
}

void write_summary_header(std::ostream& o) {
    o << "layer,angle_deg,n_t,voxels,mean_abs_error,max_abs_error";
    for (const char* r : {"center", "edge", "corner"})
        o << ',' << r << "_count," << r << "_output," << r << "_power," << r << "_abs_error";
    o << '\n';
}

void write_summary_row(std::ostream& o, const LayerRecord& rec, const LayerSummary& s) {
    o << rec.layer << ',' << format_number(rec.angle_deg) << ',' << rec.n_t << ',' << rec.y_s.size() << ','
      << format_number(s.mean_abs_error) << ',' << format_number(s.max_abs_error);
    for (const RegionStats* r : {&s.center, &s.edge, &s.corner})
        o << ',' << r->count << ',' << format_number(r->mean_output) << ',' << format_number(r->mean_power) << ','
          << format_number(r->mean_abs_error);
    o << '\n';
}

int simulate(Context& c, bool control, std::ostream& out) {
    const PlantConfig plant = c.cfg.plant();
    SilcConfig silc = c.cfg.silc;
    silc.control = control;
    const int layers = c.cfg.layers_to_run(plant.geometry);
    const double hatch_elements = c.cfg.raster.hatch / c.cfg.dx;

    auto summary = open_output(c.out_dir / "summary.csv");
    write_summary_header(summary);
    auto paths = open_output(c.out_dir / "path.csv");
    paths << "layer,n,d1,d2,on\n";

    auto observe = [&](const LayerRecord& rec) {
        const auto regions =
            classify_regions(rec.y_s.ids, plant.voxels, c.cfg.regions, plant.geometry.layer(rec.layer), hatch_elements);
        const LayerSummary s = summarize(rec, regions);
        write_summary_row(summary, rec, s);
        write_path_csv(paths, rec.path, false);
        const PgmScale scale = write_layer_map(c.out_dir / ("layer_" + layer_tag(rec.layer) + ".pgm"), rec, plant.voxels);
        c.meta_extra << "pgm_scale_layer_" << layer_tag(rec.layer) << '=' << format_number(scale.min) << ','
                     << format_number(scale.max) << '\n';
        out << "layer " << rec.layer << ": n_t=" << rec.n_t << " voxels=" << rec.y_s.size()
            << " mean|e|=" << format_number(s.mean_abs_error) << " center=" << format_number(s.center.mean_output)
            << " edge=" << format_number(s.edge.mean_output) << " corner=" << format_number(s.corner.mean_output)
            << '\n';
    };
    const auto history = run_closed_loop(plant, c.cfg.raster, silc, layers, observe);
    auto hist = open_output(c.out_dir / "history.csv");
    write_history_csv(hist, history, plant.voxels);
    write_meta(c);
    return exit_ok;
}

struct LayerMatrices {
    PlantConfig plant;
    LayerSetup setup;
    LiftedSystem lifted;
};

// The melt-pool count depends on the state, so the lifted gains use the struck-element temperature instead.
MeasurementKind analysis_measurement(const MeasurementKind& kind) {
    return kind.linear() ? kind : MeasurementKind::max_temp();
}

LayerMatrices lift_layer(const RunConfig& cfg, int layer) {
    LayerMatrices m{cfg.plant(), {}, {}};
    if (layer < 1 || layer > m.plant.geometry.layer_count())
        throw ArgumentError("--layer must lie in 1.." + std::to_string(m.plant.geometry.layer_count()));
    m.setup = prepare_layer(m.plant, cfg.raster, layer);
    const auto& s = m.setup;
    m.lifted.mode = cfg.lookup;
    m.lifted.sets = s.sets;
    const int n_t = s.path.sample_count();
    m.lifted.Q = build_Q(s.sets, n_t);
    m.lifted.P = build_P(s.sets, n_t, cfg.lookup);
    m.lifted.D_L = build_DL(s.sys, s.path, s.masks, analysis_measurement(m.plant.measurement), cfg.threads);
    m.lifted.G_s = build_Gs(m.lifted.Q, m.lifted.D_L, m.lifted.P);
    return m;
}

int build_matrices(Context& c, int layer, std::ostream& out) {
    const LayerMatrices m = lift_layer(c.cfg, layer);
    const std::pair<const char*, const Eigen::MatrixXd*> files[] = {
        {"D_L.csv", &m.lifted.D_L}, {"Q.csv", &m.lifted.Q}, {"P.csv", &m.lifted.P}, {"G_s.csv", &m.lifted.G_s}};
    for (const auto& [name, mat] : files) {
        auto f = open_output(c.out_dir / name);
        write_matrix_csv(f, *mat);
    }
    auto sets = open_output(c.out_dir / "sample_sets.csv");
    sets << "voxel_id,vx,vy,samples\n";
    for (std::size_t v = 0; v < m.lifted.sets.size(); ++v) {
        const VoxelCoord vc = voxel_coord(m.lifted.sets.voxel_ids[v], m.plant.voxels);
        sets << m.lifted.sets.voxel_ids[v] << ',' << vc.vx << ',' << vc.vy << ',';
        for (std::size_t i = 0; i < m.lifted.sets.samples[v].size(); ++i)
            sets << (i ? " " : "") << m.lifted.sets.samples[v][i];
        sets << '\n';
    }
    auto path = open_output(c.out_dir / "path.csv");
    write_path_csv(path, m.setup.path);
    c.meta_extra << "layer=" << layer << '\n'
                 << "analysis_measurement=" << to_string(analysis_measurement(m.plant.measurement).type) << '\n';
    write_meta(c);
    out << "layer " << layer << ": n_t=" << m.lifted.D_L.rows() << " n_s=" << m.lifted.sets.size() << '\n';
    return exit_ok;
}

int check_controllability(Context& c, int layer, std::ostream& out) {
    const LayerMatrices m = lift_layer(c.cfg, layer);
    ControllabilityReport rep = analyze(m.lifted, layer);
    rep.measurement = to_string(analysis_measurement(m.plant.measurement).type);
    const std::string text = rep.to_text();
    out << text;
    auto f = open_output(c.out_dir / "controllability.txt");
    f << text;
    c.meta_extra << "layer=" << layer << '\n';
    write_meta(c);
    return exit_ok;
}

int pulse_decay(Context& c, std::ostream& out) {
    MeshSpec spec{c.cfg.pulse_extent, c.cfg.pulse_extent, c.cfg.pulse_depth, c.cfg.dx, c.cfg.dy, c.cfg.dz, c.cfg.dt};
    const auto g = corner_pulse_decay(c.cfg.material, spec, c.cfg.pulse_samples, c.cfg.raster.substeps);
    std::ostringstream csv;
    csv << "sample,temperature,ratio\n";
    for (std::size_t n = 0; n < g.size(); ++n) {
        csv << n + 1 << ',' << format_number(g[n]) << ',';
        if (n > 0)
            csv << format_number(g[n] / g[n - 1]);
        csv << '\n';
    }
    out << csv.str();
    auto f = open_output(c.out_dir / "pulse_decay.csv");
    f << csv.str();
    write_meta(c);
    return exit_ok;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Layer-to-layer thermal control toolkit for laser powder bed fusion", "pbfctl"};
    app.require_subcommand(1);
    std::string config, output;
    int layer = 1;

    auto add = [&](const char* name, const char* help, bool with_layer) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", config, "key=value configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--output", output, "output directory (overrides output_dir)");
        if (with_layer)
            sub->add_option("--layer", layer, "build layer")->required();
        return sub;
    };
    CLI::App* open_loop = add("simulate-openloop", "constant-power build", false);
    CLI::App* closed_loop = add("simulate-silc", "layer-to-layer controlled build", false);
    CLI::App* matrices = add("build-matrices", "write D_L, Q, P and G_s for one layer", true);
    CLI::App* control = add("check-controllability", "controllability report for one layer", true);
    CLI::App* pulse = add("pulse-decay", "corner temperature after a one-sample pulse", false);

    std::vector<std::string> argv_store{"pbfctl"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_validation;
    }

    try {
        if (open_loop->parsed()) {
            Context c = load(config, output, "simulate-openloop");
            return simulate(c, false, out);
        }
        if (closed_loop->parsed()) {
            Context c = load(config, output, "simulate-silc");
            return simulate(c, true, out);
        }
        if (matrices->parsed()) {
            Context c = load(config, output, "build-matrices");
            return build_matrices(c, layer, out);
        }
        if (control->parsed()) {
            Context c = load(config, output, "check-controllability");
            return check_controllability(c, layer, out);
        }
        if (pulse->parsed()) {
            Context c = load(config, output, "pulse-decay");
            return pulse_decay(c, out);
        }
    } catch (const StabilityError& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const UnsupportedMeasurementError& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const std::logic_error& e) {
        err << "internal check failed: " << e.what() << '\n';
        return exit_numerical;
    }
    return exit_validation;
}

} // namespace pbf
