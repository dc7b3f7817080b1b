// Acceptance harness: one pass/fail line per criterion, exit 0 iff all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "splitfit/boundary.hpp"
#include "splitfit/cells.hpp"
#include "splitfit/fitting.hpp"
#include "splitfit/gt_voronoi.hpp"
#include "splitfit/io.hpp"
#include "splitfit/metrics.hpp"
#include "splitfit/pipeline.hpp"

using namespace splitfit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
    std::printf("criterion %d (%s): %s%s%s\n", idx, name, ok ? "PASS" : "FAIL",
                detail.empty() ? "" : " — ", detail.c_str());
    if (!ok) ++g_failures;
}

double seconds_since(const Clock::time_point& t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<Vec3> take_n(const std::vector<Vec3>& pts, std::size_t n) {
    if (pts.size() <= n) return pts;
    std::vector<Vec3> out;
    out.reserve(n);
    const double step = double(pts.size()) / double(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(pts[std::size_t(i * step)]);
    return out;
}

double dir_err(const Vec3& a, const Vec3& b) {
    return std::min((a - b).norm(), (a + b).norm());
}

PipelineResult run_scene(const fixtures::Scene& scene, int r, int threads = 0) {
    Config cfg;
    cfg.r = r;
    cfg.threads = threads;
    auto [udf, labels] = udf_from_primitive_samples(scene.sets, cfg);
    BoundaryGrid boundary = boundary_from_labels(labels);
    return run_stages(std::move(udf), std::move(boundary), scene.surface_points,
                      cfg);
}

// --- criterion 1: grow_regions vs cells_from_labels ----------------------

void criterion_cells() {
    const int r = 64;
    std::ostringstream detail;
    bool ok = true;
    for (const fixtures::Scene& scene : fixtures::all_scenes(r)) {
        Config cfg;
        cfg.r = r;
        auto [udf, labels] = udf_from_primitive_samples(scene.sets, cfg);
        BoundaryGrid b = boundary_from_labels(labels);
        const auto t0 = Clock::now();
        VoronoiCells grown = grow_regions(b);
        const double dt = seconds_since(t0);
        VoronoiCells oracle = cells_from_labels(labels);
        std::map<std::pair<int, int>, std::int64_t> votes;
        std::int64_t total = 0;
        for (std::int64_t i = 0; i < b.p.size(); ++i) {
            if (grown.cell_of.at(i) == VoronoiCells::NONE) continue;
            ++total;
            ++votes[{grown.cell_of.at(i), oracle.cell_of.at(i)}];
        }
        std::map<int, std::pair<int, std::int64_t>> best;
        for (const auto& [key, n] : votes)
            if (n > best[key.first].second) best[key.first] = {key.second, n};
        std::int64_t agree = 0;
        for (const auto& [g, o] : best) agree += o.second;
        const double frac = double(agree) / double(total);
        detail << scene.name << " " << int(frac * 1000) / 10.0 << "% "
               << int(dt * 10) / 10.0 << "s; ";
        if (frac < 0.95 || dt >= 10.0) ok = false;
    }
    report(1, "cell oracle equivalence", ok, detail.str());
}

// --- criterion 2: end-to-end cube at r=128 --------------------------------

void criterion_cube() {
    const int r = 128;
    const auto t0 = Clock::now();
    const fixtures::Scene scene = fixtures::scene_cube(r);
    const PipelineResult res = run_scene(scene, r);
    const double dt = seconds_since(t0);
    const BRepModel& m = res.brep.model;
    bool ok = m.n_surfaces() == 6 && m.n_curves() == 12 && m.n_vertices() == 8;
    const bool euler = m.n_vertices() - m.n_curves() + m.n_surfaces() == 2;
    ok = ok && euler;
    double worst_normal = 0;
    for (const SurfacePrimitive& s : m.surfaces) {
        if (surface_kind(s) != SurfaceKind::Plane) {
            ok = false;
            continue;
        }
        const Vec3 n = std::get<Plane>(s).normal.cwiseAbs();
        worst_normal = std::max(worst_normal, std::abs(n.maxCoeff() - 1.0));
    }
    ok = ok && worst_normal < 1e-3;
    const BRepModel& gt = fixtures::gt_cube_brep().model;
    Config cfg;
    const DetectionResult det = detection_scores(
        PrimitiveLists::from(m), PrimitiveLists::from(gt), cfg.match_thresholds);
    const TopoScores topo = topo_f1(m, gt, det);
    ok = ok && topo.fe_f1 == 1.0 && topo.ev_f1 == 1.0 && dt < 60.0;
    std::ostringstream detail;
    detail << "F/E/V=" << m.n_surfaces() << "/" << m.n_curves() << "/"
           << m.n_vertices() << " normal_err=" << worst_normal
           << " FE=" << topo.fe_f1 << " EV=" << topo.ev_f1 << " Euler="
           << (euler ? "ok" : "bad") << " t=" << int(dt * 10) / 10.0 << "s";
    report(2, "end-to-end cube r=128", ok, detail.str());
}

// --- criterion 3: capped cylinder -----------------------------------------

double capped_radius(const BRepModel& m, int* planes, int* cylinders,
                     int* circles) {
    *planes = *cylinders = 0;
    *circles = 0;
    double radius = -1;
    for (const SurfacePrimitive& s : m.surfaces) {
        if (surface_kind(s) == SurfaceKind::Plane) ++*planes;
        if (surface_kind(s) == SurfaceKind::Cylinder) {
            ++*cylinders;
            radius = std::get<Cylinder>(s).radius;
        }
    }
    for (const CurvePrimitive& c : m.curves)
        if (curve_kind(c) == CurveKind::Circle) ++*circles;
    return radius;
}

void criterion_capped_cylinder() {
    const int r = 64;
    int planes = 0, cylinders = 0, circles = 0;
    const PipelineResult clean =
        run_scene(fixtures::scene_capped_cylinder(r), r);
    const double rad =
        capped_radius(clean.brep.model, &planes, &cylinders, &circles);
    const BRepModel& m = clean.brep.model;
    bool ok = m.n_surfaces() == 3 && planes == 2 && cylinders == 1 &&
              m.n_curves() == 2 && circles == 2 && m.n_vertices() == 0 &&
              std::abs(rad - 0.2) < 1e-3;

    int np = 0, ncy = 0, nci = 0;
    const PipelineResult noisy =
        run_scene(fixtures::scene_capped_cylinder(r, 0.002), r);
    const double rad_noisy = capped_radius(noisy.brep.model, &np, &ncy, &nci);
    const bool noisy_ok = ncy >= 1 && std::abs(rad_noisy - 0.2) < 0.01;
    ok = ok && noisy_ok;
    std::ostringstream detail;
    detail << "F/E/V=" << m.n_surfaces() << "/" << m.n_curves() << "/"
           << m.n_vertices() << " radius_err=" << std::abs(rad - 0.2)
           << " noisy_radius_err=" << std::abs(rad_noisy - 0.2);
    report(3, "end-to-end capped cylinder", ok, detail.str());
}

// --- criterion 4: detector quality ----------------------------------------

// The detector sees only the distance field, so its GT is the Voronoi
// decomposition induced by the surface sets alone: the curve/vertex sample
// sets share their geometry with the adjacent faces and contribute label
// boundaries with no distance-field signature. Recall is measured on the
// sharp subset of that boundary — voxels whose two competing cells have
// nearest sites more than 2 voxels apart. Where the competing sites nearly
// coincide (e.g. just outside a convex edge, where both faces' nearest
// samples sit on the shared seam) the distance field is smooth, so no
// function of it can recover the label change there. Precision counts a flag
// as correct when a GT boundary voxel (sharp or not) lies within the 1-voxel
// dilation.
void criterion_detector() {
    const int r = 64;
    std::ostringstream detail;
    bool ok = true;
    for (fixtures::Scene& scene : fixtures::all_scenes(r)) {
        Config cfg;
        cfg.r = r;
        const double h = cfg.spacing();
        scene.sets.resize(scene.n_surface_sets);
        auto [udf, labels] = udf_from_primitive_samples(scene.sets, cfg);
        BoundaryGrid gt = boundary_from_labels(labels);
        std::vector<PointIndex> idx;
        idx.reserve(scene.sets.size());
        for (const auto& set : scene.sets) idx.emplace_back(set);
        DetectorParams params;
        params.tau = cfg.detect_tau();
        BoundaryGrid pred = detect_analytic(udf, params);
        auto dilated = [&](const BoundaryGrid& b, const GridCoord& c) {
            if (b.flag(c)) return true;
            for (const GridCoord& n : voxel_neighbors(c, 26, r))
                if (b.flag(n)) return true;
            return false;
        };
        auto sharp = [&](std::int64_t i, const GridCoord& c) {
            const int L = labels.at(i);
            const Vec3 x = world_of(c, udf.geom);
            for (const GridCoord& n : voxel_neighbors(c, 6, r)) {
                const int M = labels.at(n);
                if (M == L) continue;
                const Vec3 a = idx[L].nearest(x).point;
                const Vec3 b = idx[M].nearest(x).point;
                if ((a - b).norm() > 2.0 * h) return true;
            }
            return false;
        };
        std::int64_t tp = 0, fp = 0, gt_hit = 0, gt_total = 0;
        for (std::int64_t i = 0; i < gt.p.size(); ++i) {
            const GridCoord c = coord_of(i, r);
            if (c.x < 2 || c.y < 2 || c.z < 2 || c.x >= r - 2 || c.y >= r - 2 ||
                c.z >= r - 2)
                continue;
            if (udf.at(i).d > params.d_max) continue;
            if (pred.flag(c)) (dilated(gt, c) ? tp : fp)++;
            if (gt.flag(c) && sharp(i, c)) {
                ++gt_total;
                gt_hit += dilated(pred, c);
            }
        }
        const double recall = double(gt_hit) / double(gt_total);
        const double precision = double(tp) / double(std::max<std::int64_t>(tp + fp, 1));
        detail << scene.name << " R=" << int(recall * 1000) / 1000.0
               << " P=" << int(precision * 1000) / 1000.0 << "; ";
        if (recall < 0.9 || precision < 0.6) ok = false;
    }
    report(4, "analytic detector quality", ok, detail.str());
}

// --- criterion 5: fitting recovery ----------------------------------------

struct KindCheck {
    const char* name;
    std::function<std::vector<Vec3>()> sample;
    std::function<double(const FitResult&)> param_err;  // max parameter error
    bool is_curve = false;
    CurveKind ck = CurveKind::Line;
    SurfaceKind sk = SurfaceKind::Plane;
};

void criterion_fitting() {
    const Eigen::AlignedBox3d band(Vec3(0, 0, 0.2), Vec3(1, 1, 0.8));
    const Plane gt_plane{Vec3::UnitZ(), 0.5};
    const Sphere gt_sphere{Vec3(0.5, 0.5, 0.5), 0.3};
    const Cylinder gt_cyl{Vec3(0.5, 0.5, 0), Vec3::UnitZ(), 0.2};
    const Cone gt_cone{Vec3(0.5, 0.5, 0.9), -Vec3::UnitZ(), 0.5};
    const Torus gt_torus{Vec3(0.5, 0.5, 0.5), Vec3::UnitZ(), 0.3, 0.1};
    const Line gt_line{Vec3(0.5, 0.5, 0), Vec3::UnitZ()};
    const Circle gt_circle{Vec3(0.5, 0.5, 0.5), Vec3::UnitZ(), 0.25};
    const Ellipse gt_ellipse{Vec3(0.5, 0.5, 0.5), Vec3::UnitZ(), Vec3::UnitX(),
                             0.3, 0.15};

    std::vector<KindCheck> kinds;
    kinds.push_back(
        {"plane",
         [&] {
             return fixtures::sampled(SurfacePrimitive(gt_plane), 4000.0,
                                      Eigen::AlignedBox3d(Vec3(0.2, 0.2, 0),
                                                          Vec3(0.8, 0.8, 1)));
         },
         [&](const FitResult& f) {
             const Plane& p = std::get<Plane>(f.surface());
             const double sign = p.normal.dot(gt_plane.normal) < 0 ? -1.0 : 1.0;
             return std::max(dir_err(p.normal, gt_plane.normal),
                             std::abs(sign * p.offset - gt_plane.offset));
         },
         false, CurveKind::Line, SurfaceKind::Plane});
    kinds.push_back(
        {"sphere",
         [&] { return fixtures::sampled(SurfacePrimitive(gt_sphere), 3000.0); },
         [&](const FitResult& f) {
             const Sphere& s = std::get<Sphere>(f.surface());
             return std::max((s.center - gt_sphere.center).norm(),
                             std::abs(s.radius - gt_sphere.radius));
         },
         false, CurveKind::Line, SurfaceKind::Sphere});
    kinds.push_back(
        {"cylinder",
         [&] { return fixtures::sampled(SurfacePrimitive(gt_cyl), 3000.0, band); },
         [&](const FitResult& f) {
             const Cylinder& c = std::get<Cylinder>(f.surface());
             const Vec3 d = (gt_cyl.point - c.point) -
                            (gt_cyl.point - c.point).dot(c.axis) * c.axis;
             return std::max({dir_err(c.axis, gt_cyl.axis),
                              std::abs(c.radius - gt_cyl.radius), d.norm()});
         },
         false, CurveKind::Line, SurfaceKind::Cylinder});
    kinds.push_back(
        {"cone",
         [&] { return fixtures::sampled(SurfacePrimitive(gt_cone), 3000.0, band); },
         [&](const FitResult& f) {
             const Cone& c = std::get<Cone>(f.surface());
             return std::max({(c.apex - gt_cone.apex).norm(),
                              (c.axis - gt_cone.axis).norm(),
                              std::abs(c.half_angle - gt_cone.half_angle)});
         },
         false, CurveKind::Line, SurfaceKind::Cone});
    kinds.push_back(
        {"torus",
         [&] { return fixtures::sampled(SurfacePrimitive(gt_torus), 2500.0); },
         [&](const FitResult& f) {
             const Torus& t = std::get<Torus>(f.surface());
             return std::max({(t.center - gt_torus.center).norm(),
                              dir_err(t.axis, gt_torus.axis),
                              std::abs(t.major_radius - gt_torus.major_radius),
                              std::abs(t.minor_radius - gt_torus.minor_radius)});
         },
         false, CurveKind::Line, SurfaceKind::Torus});
    kinds.push_back(
        {"line",
         [&] { return fixtures::sampled(CurvePrimitive(gt_line), 2000.0); },
         [&](const FitResult& f) {
             const Line& l = std::get<Line>(f.curve());
             const Vec3 d = (gt_line.point - l.point) -
                            (gt_line.point - l.point).dot(l.direction) * l.direction;
             return std::max(dir_err(l.direction, gt_line.direction), d.norm());
         },
         true, CurveKind::Line, SurfaceKind::Plane});
    kinds.push_back(
        {"circle",
         [&] { return fixtures::sampled(CurvePrimitive(gt_circle), 1200.0); },
         [&](const FitResult& f) {
             const Circle& c = std::get<Circle>(f.curve());
             return std::max({(c.center - gt_circle.center).norm(),
                              dir_err(c.normal, gt_circle.normal),
                              std::abs(c.radius - gt_circle.radius)});
         },
         true, CurveKind::Circle, SurfaceKind::Plane});
    kinds.push_back(
        {"ellipse",
         [&] { return fixtures::sampled(CurvePrimitive(gt_ellipse), 1200.0); },
         [&](const FitResult& f) {
             const Ellipse& e = std::get<Ellipse>(f.curve());
             return std::max({(e.center - gt_ellipse.center).norm(),
                              dir_err(e.normal, gt_ellipse.normal),
                              dir_err(e.major_axis, gt_ellipse.major_axis),
                              std::abs(e.a - gt_ellipse.a),
                              std::abs(e.b - gt_ellipse.b)});
         },
         true, CurveKind::Ellipse, SurfaceKind::Plane});

    bool ok = true;
    std::ostringstream detail;
    int non_convergent = 0;
    for (const KindCheck& k : kinds) {
        std::vector<Vec3> clean = take_n(k.sample(), 1000);
        std::vector<Vec3> noisy = k.sample();
        fixtures::add_noise(noisy, 0.002, 7);
        const FitResult f0 =
            k.is_curve ? fit_curve(clean, k.ck) : fit_surface(clean, k.sk);
        const FitResult f1 =
            k.is_curve ? fit_curve(noisy, k.ck) : fit_surface(noisy, k.sk);
        if (!std::isfinite(f0.rms)) ++non_convergent;
        if (!std::isfinite(f1.rms)) ++non_convergent;
        const double e0 = std::isfinite(f0.rms) ? k.param_err(f0) : 1e9;
        const double e1 = std::isfinite(f1.rms) ? k.param_err(f1) : 1e9;
        detail << k.name << " " << e0 << "/" << e1 << "; ";
        if (e0 >= 1e-4 || e1 >= 0.01) ok = false;
    }
    ok = ok && non_convergent == 0;
    detail << "non_convergent=" << non_convergent;
    report(5, "fitting recovery (noiseless/noisy)", ok, detail.str());
}

// --- criterion 6: metric identities ---------------------------------------

void criterion_metrics() {
    const BRepModel gt = fixtures::gt_cube_brep().model;
    Config cfg;
    const DetectionResult det = detection_scores(
        PrimitiveLists::from(gt), PrimitiveLists::from(gt), cfg.match_thresholds);
    bool ok = det.per_threshold.size() == 5;
    for (const DetectionReport& rep : det.per_threshold) {
        ok = ok && rep.surface.f1 == 1.0 && rep.curve.f1 == 1.0 &&
             rep.vertex.f1 == 1.0;
    }
    const TopoScores topo = topo_f1(gt, gt, det);
    ok = ok && topo.fe_f1 == 1.0 && topo.ev_f1 == 1.0;
    const std::vector<Vec3> pts =
        fixtures::sampled(SurfacePrimitive(Sphere{Vec3(0.5, 0.5, 0.5), 0.3}), 500.0);
    const double cd = chamfer(pts, pts);
    ok = ok && cd == 0.0;
    std::ostringstream detail;
    detail << "self F1=1 at " << det.per_threshold.size()
           << " thresholds, FE=" << topo.fe_f1 << " EV=" << topo.ev_f1
           << " chamfer(A,A)=" << cd;
    report(6, "metric identities", ok, detail.str());
}

// --- criterion 7: published thresholds ------------------------------------

void criterion_config() {
    const Config cfg;
    const bool ok = cfg.eps1 == 0.001 && cfg.eps2 == 0.02 && cfg.eps3 == 0.05 &&
                    cfg.patch_stride == 16 && cfg.patch_size == 32;
    std::ostringstream detail;
    detail << "eps1=" << cfg.eps1 << " eps2=" << cfg.eps2 << " eps3=" << cfg.eps3
           << " s=" << cfg.patch_stride << " k=" << cfg.patch_size;
    report(7, "published thresholds", ok, detail.str());
}

// --- criterion 8: thread-count determinism --------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_determinism() {
    const int r = 64;
    const fixtures::Scene scene = fixtures::scene_cube(r);
    Config cfg;
    cfg.r = r;
    auto [udf, labels] = udf_from_primitive_samples(scene.sets, cfg);

    const fs::path dir = fs::temp_directory_path() / "splitfit_acceptance";
    fs::create_directories(dir);
    write_nvdl(dir / "cube.nvdl", labels);
    PointCloud pc;
    pc.points = scene.surface_points;
    write_points(dir / "cube_points.txt", pc);

    std::string outputs[2];
    const int thread_counts[2] = {1, 8};
    for (int i = 0; i < 2; ++i) {
        PipelineManifest m;
        m.input_path = dir / "cube.nvdl";
        m.kind = InputKind::Labels;
        m.points_path = dir / "cube_points.txt";
        m.output_dir = dir / ("run_t" + std::to_string(thread_counts[i]));
        m.config = cfg;
        m.config.threads = thread_counts[i];
        run_pipeline(m);
        outputs[i] = slurp(m.output_dir / "brep.json");
    }
    const bool ok = !outputs[0].empty() && outputs[0] == outputs[1];
    std::ostringstream detail;
    detail << "brep.json bytes: " << outputs[0].size() << " vs "
           << outputs[1].size() << (ok ? " (identical)" : " (DIFFER)");
    report(8, "thread-count determinism", ok, detail.str());
}

// --- criterion 9: tiling consistency --------------------------------------

void criterion_tiling() {
    const int r = 64;
    Config cfg;
    cfg.r = r;
    const fixtures::Scene scene = fixtures::scene_two_planes(r);
    auto [udf, labels] = udf_from_primitive_samples(scene.sets, cfg);
    DetectorParams params;
    params.tau = cfg.detect_tau();
    BoundaryGrid whole = detect_analytic(udf, params);
    const PatchSpec spec = PatchSpec::cover(r, cfg.patch_stride, cfg.patch_size);
    BoundaryGrid tiled = tile_and_merge(udf, spec, [&](const UdfGrid& patch) {
        return detect_analytic(patch, params, 0, true).p;
    });
    std::int64_t agree = 0;
    for (std::int64_t i = 0; i < whole.p.size(); ++i)
        agree += whole.flag(i) == tiled.flag(i);
    const double frac = double(agree) / double(whole.p.size());
    const bool ok = frac >= 0.99;
    std::ostringstream detail;
    detail << "flag agreement " << frac;
    report(9, "tiling consistency", ok, detail.str());
}

}  // namespace

int main() {
    criterion_cells();
    criterion_cube();
    criterion_capped_cylinder();
    criterion_detector();
    criterion_fitting();
    criterion_metrics();
    criterion_config();
    criterion_determinism();
    criterion_tiling();
    return g_failures == 0 ? 0 : 1;
}
