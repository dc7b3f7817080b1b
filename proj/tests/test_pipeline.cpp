#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "fixtures.hpp"
#include "splitfit/gt_voronoi.hpp"
#include "splitfit/pipeline.hpp"

using namespace splitfit;

namespace {

PipelineResult run_scene(const fixtures::Scene& scene, int r, int threads = 0) {
    Config cfg;
    cfg.r = r;
    cfg.threads = threads;
    auto [udf, labels] = udf_from_primitive_samples(scene.sets, cfg);
    BoundaryGrid boundary = boundary_from_labels(labels);
    return run_stages(std::move(udf), std::move(boundary), scene.surface_points,
                      cfg);
}

}  // namespace

TEST_CASE("cube GT-boundary pipeline recovers the brep") {
    const int r = 64;
    const fixtures::Scene scene = fixtures::scene_cube(r);
    const PipelineResult res = run_scene(scene, r);
    const BRepModel& m = res.brep.model;
    MESSAGE("surfaces=", m.n_surfaces(), " curves=", m.n_curves(),
            " vertices=", m.n_vertices(), " cells=", res.cells.n_cells);
    CHECK(m.n_surfaces() == 6);
    CHECK(m.n_curves() == 12);
    CHECK(m.n_vertices() == 8);
    CHECK(m.n_vertices() - m.n_curves() + m.n_surfaces() == 2);
    // every surface is an axis-aligned plane
    for (const SurfacePrimitive& s : m.surfaces) {
        REQUIRE(surface_kind(s) == SurfaceKind::Plane);
        const Vec3 n = std::get<Plane>(s).normal.cwiseAbs();
        CHECK(std::abs(n.maxCoeff() - 1.0) < 1e-3);
    }
}

TEST_CASE("capped cylinder pipeline: 3 surfaces, 2 circles, no vertices") {
    const int r = 64;
    const fixtures::Scene scene = fixtures::scene_capped_cylinder(r);
    const PipelineResult res = run_scene(scene, r);
    const BRepModel& m = res.brep.model;
    MESSAGE("surfaces=", m.n_surfaces(), " curves=", m.n_curves(),
            " vertices=", m.n_vertices());
    REQUIRE(m.n_surfaces() == 3);
    CHECK(m.n_curves() == 2);
    CHECK(m.n_vertices() == 0);
    int planes = 0, cylinders = 0;
    double radius = 0;
    for (const SurfacePrimitive& s : m.surfaces) {
        if (surface_kind(s) == SurfaceKind::Plane) ++planes;
        if (surface_kind(s) == SurfaceKind::Cylinder) {
            ++cylinders;
            radius = std::get<Cylinder>(s).radius;
        }
    }
    CHECK(planes == 2);
    CHECK(cylinders == 1);
    CHECK(std::abs(radius - 0.2) < 1e-3);
    for (const CurvePrimitive& c : m.curves)
        CHECK(curve_kind(c) == CurveKind::Circle);
}

TEST_CASE("empty boundary and a sphere gives one surface, no topology") {
    const int r = 48;
    Config cfg;
    cfg.r = r;
    SurfacePrimitive sphere = Sphere{Vec3(0.5, 0.5, 0.5), 0.3};
    auto pts = fixtures::sampled(sphere, 30000.0);
    UdfGrid udf = udf_from_points(pts, cfg);
    BoundaryGrid empty{VoxelGrid<float>(udf.geom, 0.0f)};
    PipelineResult res = run_stages(std::move(udf), empty, pts, cfg);
    const BRepModel& m = res.brep.model;
    CHECK(res.cells.n_cells == 1);
    REQUIRE(m.n_surfaces() == 1);
    CHECK(surface_kind(m.surfaces[0]) == SurfaceKind::Sphere);
    CHECK(m.n_curves() == 0);
    CHECK(m.n_vertices() == 0);
    CHECK(std::abs(std::get<Sphere>(m.surfaces[0]).radius - 0.3) < 1e-3);
}

TEST_CASE("pipeline output is independent of the thread count") {
    const int r = 48;
    const fixtures::Scene scene = fixtures::scene_cube(r);
    PipelineResult a = run_scene(scene, r, 1);
    PipelineResult b = run_scene(scene, r, 8);
    BRepFile fa{a.brep.model, a.brep.warnings, a.brep.config};
    BRepFile fb{b.brep.model, b.brep.warnings, b.brep.config};
    CHECK(brep_to_json(fa) == brep_to_json(fb));
}

TEST_CASE("denormalize maps the model back to input coordinates") {
    Normalization n;
    n.scale = 0.5;  // shape originally spanned 2 units
    n.offset = Vec3(10, 20, 30);
    BRepModel m;
    m.vertices = {Vec3(0.5, 0.5, 0.5)};
    m.surfaces = {Sphere{Vec3(0.5, 0.5, 0.5), 0.25}};
    m.curves = {Circle{Vec3(0.5, 0.5, 0.5), Vec3::UnitZ(), 0.1}};
    m.FF = BoolMatrix(1, 1);
    m.FE = BoolMatrix(1, 1);
    m.EE = BoolMatrix(1, 1);
    m.EV = BoolMatrix(1, 1);
    m.FV = BoolMatrix(1, 1);
    BRepModel out = denormalize(m, n);
    CHECK((out.vertices[0] - Vec3(10, 20, 30)).norm() < 1e-12);
    CHECK(std::get<Sphere>(out.surfaces[0]).radius == doctest::Approx(0.5));
    CHECK((std::get<Sphere>(out.surfaces[0]).center - Vec3(10, 20, 30)).norm() <
          1e-12);
    CHECK(std::get<Circle>(out.curves[0]).radius == doctest::Approx(0.2));
}

TEST_CASE("hand-built GT models satisfy the brep invariants") {
    for (const BRepFile& f :
         {fixtures::gt_cube_brep(), fixtures::gt_capped_cylinder_brep()}) {
        CHECK(f.model.FF.symmetric_zero_diagonal());
        CHECK(f.model.EE.symmetric_zero_diagonal());
        CHECK(f.model.FE.rows() == f.model.n_surfaces());
        CHECK(f.model.FE.cols() == f.model.n_curves());
        CHECK(f.model.EV.rows() == f.model.n_curves());
        CHECK(f.model.EV.cols() == f.model.n_vertices());
    }
    const BRepModel& cube = fixtures::gt_cube_brep().model;
    CHECK(cube.n_surfaces() == 6);
    CHECK(cube.n_curves() == 12);
    CHECK(cube.n_vertices() == 8);
    for (int v = 0; v < 8; ++v) {
        int deg = 0;
        for (int e = 0; e < 12; ++e) deg += cube.EV.at(e, v);
        CHECK(deg == 3);
    }
}
