#include "doctest.h"

#include "pbf/error.hpp"
#include "pbf/silc.hpp"

#include "support.hpp"

#include <sstream>

using namespace pbf;

namespace {

VoxelMap map_of(std::vector<int> ids, std::vector<double> v) {
    return VoxelMap{std::move(ids), Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))};
}

PlantConfig small_plant() {
    PlantConfig p;
    p.mesh = MeshSpec{9, 6, 2, 1e-4, 1e-4, 1e-4, 2e-5};
    p.material = MaterialParams{33.5, 6e-6, 0.3};
    p.geometry = make_rectangle(9, 6, 5);
    p.measurement = MeasurementKind::max_temp();
    p.voxels = voxel_grid_for(p.geometry, 3, 3);
    return p;
}

const RasterParams small_raster{2e-4, 2.5, 0.0, 0.0, 4};

} // namespace

TEST_CASE("update law") {
    SilcConfig cfg;
    cfg.gamma = 0.5;
    const VoxelMap u = map_of({1, 4}, {100.0, 390.0});
    CHECK(silc_update(u, map_of({1, 4}, {0.0, 0.0}), cfg).values == u.values);
    const VoxelMap next = silc_update(u, map_of({1, 4}, {-10.0, 40.0}), cfg);
    CHECK(next.values[0] == 95.0);
    CHECK(next.values[1] == 400.0); // clamped at u_max
    cfg.saturate = false;
    CHECK(silc_update(u, map_of({1, 4}, {-10.0, 40.0}), cfg).values[1] == 410.0);
    cfg.saturate = true;
    CHECK(silc_update(u, map_of({1, 4}, {-500.0, 0.0}), cfg).values[0] == 0.0);
    CHECK_THROWS_AS(silc_update(u, map_of({1, 5}, {0.0, 0.0}), cfg), DimensionError);
}

TEST_CASE("config validation") {
    SilcConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.gamma = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    cfg.gamma = 0.2;
    cfg.u_nominal = 500.0;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    cfg.u_nominal = 250.0;
    cfg.start_layer = 0;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}

TEST_CASE("tracking error") {
    CHECK(tracking_error(40.0, map_of({2}, {45.0})).values[0] == -5.0);
    CHECK(tracking_error(40.0, map_of({2, 3}, {40.0, 40.0})).values.isZero());
    const VoxelMap ref = map_of({1, 2, 3}, {10.0, 20.0, 30.0});
    const VoxelMap e = tracking_error(ref, map_of({1, 3}, {12.0, 25.0}));
    CHECK(e.ids == std::vector<int>{1, 3});
    CHECK(e.values[0] == -2.0);
    CHECK(e.values[1] == 5.0);
    CHECK_THROWS_AS(tracking_error(ref, map_of({4}, {1.0})), DimensionError);
}

TEST_CASE("convergence margin") {
    CHECK(convergence_margin(Eigen::MatrixXd::Identity(4, 4), 0.2) == doctest::Approx(0.8));
    CHECK(convergence_margin(Eigen::MatrixXd::Identity(4, 4), 0.0) == doctest::Approx(1.0));
    Eigen::MatrixXd G(2, 2);
    G << 2, 1, 0, 12;
    CHECK(convergence_margin(G, 0.2) == doctest::Approx(1.4));
    // complex pair: rotation block
    Eigen::MatrixXd R(2, 2);
    R << 1, -1, 1, 1;
    CHECK(convergence_margin(R, 1.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(convergence_margin(Eigen::MatrixXd::Ones(2, 3), 0.2), DimensionError);
}

TEST_CASE("powers carried between layers") {
    const VoxelMap u = map_of({1, 2, 5, 7}, {1.0, 2.0, 5.0, 7.0});
    CHECK(transfer_between_layers(u, u.ids, 250.0).values == u.values);
    const VoxelMap shrunk = transfer_between_layers(u, {2, 7}, 250.0);
    CHECK(shrunk.values[0] == 2.0);
    CHECK(shrunk.values[1] == 7.0);
    const VoxelMap grown = transfer_between_layers(u, {1, 3}, 250.0);
    CHECK(grown.values[1] == 250.0);
    CHECK(u.find(5).value() == 5.0);
    CHECK_FALSE(u.find(6).has_value());
}

TEST_CASE("closed loop bookkeeping") {
    const PlantConfig plant = small_plant();
    SilcConfig cfg;
    cfg.reference = 2.0;
    CHECK(run_closed_loop(plant, small_raster, cfg, 0).empty());
    CHECK_THROWS_AS(run_closed_loop(plant, small_raster, cfg, 6), ArgumentError);

    cfg.control = false;
    int seen = 0;
    const auto open = run_closed_loop(plant, small_raster, cfg, 3, [&](const LayerRecord& r) { seen = r.layer; });
    CHECK(seen == 3);
    REQUIRE(open.size() == 3);
    for (const auto& rec : open) {
        CHECK((rec.u_s.values.array() == 250.0).all());
        CHECK(rec.e_s.values.isApprox((Eigen::VectorXd::Constant(rec.y_s.size(), 2.0) - rec.y_s.values)));
        CHECK(rec.n_t == rec.path.sample_count());
    }

    cfg.control = true;
    cfg.start_layer = 3;
    const auto closed = run_closed_loop(plant, small_raster, cfg, 5);
    REQUIRE(closed.size() == 5);
    for (int l = 0; l < 3; ++l) {
        CHECK((closed[static_cast<std::size_t>(l)].u_s.values.array() == 250.0).all());
        CHECK(closed[static_cast<std::size_t>(l)].y_s.values == open[static_cast<std::size_t>(l)].y_s.values);
    }
    const VoxelMap expected = silc_update(closed[2].u_s, closed[2].e_s, cfg);
    CHECK(closed[3].u_s.values == transfer_between_layers(expected, closed[3].u_s.ids, 250.0).values);
}

TEST_CASE("inputs for empty look-up rows") {
    const PlantConfig plant = small_plant();
    const LayerSetup s = prepare_layer(plant, small_raster, 2);
    const int n_t = s.path.sample_count();
    const Eigen::MatrixXd P = build_P(s.sets, n_t, LookupMode::Backward);
    const VoxelMap u = VoxelMap::constant(s.sets.voxel_ids, 100.0);
    const Eigen::VectorXd ut = expand_inputs(s, P, u, 250.0);
    for (Eigen::Index n = 0; n < n_t; ++n) {
        if (P.row(n).any())
            CHECK(ut[n] == 100.0);
        else
            CHECK((ut[n] == 250.0 || ut[n] == 0.0));
    }
    CHECK_THROWS_AS(expand_inputs(s, P, VoxelMap::constant({1}, 1.0), 250.0), DimensionError);
}

TEST_CASE("region labels") {
    const VoxelGridSpec v{1, 1, 2, 2, 3, 3};
    std::vector<int> all;
    for (int id = 1; id <= 9; ++id)
        all.push_back(id);
    const LayerMask mask(6, 6, true);
    const auto boundary = classify_regions(all, v, RegionScheme::Boundary, mask, 1.0);
    for (int id = 1; id <= 9; ++id)
        CHECK((boundary[static_cast<std::size_t>(id - 1)] == Region::Center) == (id == 5));

    // prism rule: the last tracks form the corner, top and bottom voxels of a column are edges
    const auto prism = classify_regions(all, v, RegionScheme::Prism, mask, 0.25);
    CHECK(prism[4] == Region::Center);
    CHECK(prism[1] == Region::Edge);
    CHECK(prism[7] == Region::Edge);
    CHECK(prism[2] == Region::Corner);
    CHECK(prism[5] == Region::Corner);
    CHECK(prism[3] == Region::Center);
    CHECK(prism[0] == Region::Edge);
    CHECK(parse_region_scheme("boundary") == RegionScheme::Boundary);
    CHECK_THROWS_AS(parse_region_scheme("ring"), ArgumentError);
}

TEST_CASE("layer summary and history CSV") {
    LayerRecord rec;
    rec.layer = 7;
    rec.u_s = map_of({1, 2, 3}, {200.0, 250.0, 300.0});
    rec.y_s = map_of({1, 2, 3}, {41.0, 38.0, 50.0});
    rec.e_s = tracking_error(40.0, rec.y_s);
    const LayerSummary s = summarize(rec, {Region::Center, Region::Center, Region::Edge});
    CHECK(s.mean_abs_error == doctest::Approx(13.0 / 3.0));
    CHECK(s.max_abs_error == 10.0);
    CHECK(s.center.count == 2);
    CHECK(s.center.mean_output == doctest::Approx(39.5));
    CHECK(s.center.mean_power == doctest::Approx(225.0));
    CHECK(s.edge.mean_abs_error == 10.0);
    CHECK(s.corner.count == 0);
    CHECK_THROWS_AS(summarize(rec, {Region::Center}), DimensionError);

    std::ostringstream o;
    write_history_csv(o, {rec}, VoxelGridSpec{1, 1, 1, 1, 2, 2});
    CHECK(o.str() == "layer,voxel_id,vx,vy,u_s,y_s,e_s\n7,1,1,1,200,41,-1\n7,2,2,1,250,38,2\n7,3,1,2,300,50,-10\n");
}
