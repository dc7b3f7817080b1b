#include "fixtures.hpp"

#include <random>

namespace splitfit::fixtures {
namespace {

using Box = Eigen::AlignedBox3d;

double area_density(int r) { return 16.0 * r * r; }  // quarter-voxel spacing
double len_density(int r) { return 4.0 * r; }

Box box(const Vec3& lo, const Vec3& hi) { return {lo, hi}; }

std::vector<Vec3> filtered(std::vector<Vec3> pts,
                           const std::function<bool(const Vec3&)>& keep) {
    std::vector<Vec3> out;
    out.reserve(pts.size());
    for (const Vec3& p : pts) {
        if (keep(p)) out.push_back(p);
    }
    return out;
}

void pool(Scene& s) {
    for (const auto& set : s.sets) {
        s.surface_points.insert(s.surface_points.end(), set.begin(), set.end());
    }
}

}  // namespace

std::vector<Vec3> sampled(const SurfacePrimitive& s, double density,
                          const Eigen::AlignedBox3d& extent) {
    return sample_primitive(s, density, extent);
}

std::vector<Vec3> sampled(const CurvePrimitive& c, double density,
                          const Eigen::AlignedBox3d& extent) {
    return sample_primitive(c, density, extent);
}

void add_noise(std::vector<Vec3>& pts, double sigma, std::uint64_t seed) {
    if (sigma <= 0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sigma);
    for (Vec3& p : pts) {
        p.x() += g(rng);
        p.y() += g(rng);
        p.z() += g(rng);
    }
}

Scene scene_two_planes(int r) {
    Scene s;
    s.name = "two-planes";
    const double ad = area_density(r);
    for (double z : {0.3, 0.7}) {
        s.sets.push_back(sampled(SurfacePrimitive{Plane{Vec3::UnitZ(), z}}, ad));
    }
    s.n_surface_sets = int(s.sets.size());
    pool(s);
    return s;
}

Scene scene_cube(int r) {
    Scene s;
    s.name = "cube";
    const double lo = 0.25, hi = 0.75;
    const double ad = area_density(r), ld = len_density(r);
    // 6 faces
    for (int ax = 0; ax < 3; ++ax) {
        for (double off : {lo, hi}) {
            Vec3 n = Vec3::Zero();
            n[ax] = 1;
            Vec3 bmin = Vec3::Constant(lo), bmax = Vec3::Constant(hi);
            bmin[ax] = bmax[ax] = off;
            s.sets.push_back(sampled(SurfacePrimitive{Plane{n, off}}, ad,
                                     box(bmin, bmax)));
        }
    }
    s.n_surface_sets = int(s.sets.size());
    // 12 edges: for each axis, the 4 lines along it
    for (int ax = 0; ax < 3; ++ax) {
        const int a1 = (ax + 1) % 3, a2 = (ax + 2) % 3;
        for (double v1 : {lo, hi}) {
            for (double v2 : {lo, hi}) {
                Vec3 p = Vec3::Zero();
                p[ax] = lo;
                p[a1] = v1;
                p[a2] = v2;
                Vec3 d = Vec3::Zero();
                d[ax] = 1;
                Vec3 bmin = p, bmax = p;
                bmax[ax] = hi;
                s.sets.push_back(sampled(CurvePrimitive{Line{p, d}}, ld,
                                         box(bmin, bmax)));
            }
        }
    }
    // 8 corners
    for (double x : {lo, hi}) {
        for (double y : {lo, hi}) {
            for (double z : {lo, hi}) {
                s.sets.push_back({Vec3(x, y, z)});
            }
        }
    }
    pool(s);
    return s;
}

Scene scene_capped_cylinder(int r, double sigma) {
    Scene s;
    s.name = "capped-cylinder";
    const Vec3 c(0.5, 0.5, 0.0);
    const double radius = 0.2, z0 = 0.2, z1 = 0.8;
    const double ad = area_density(r), ld = len_density(r);
    auto inside = [&](const Vec3& p) {
        return (p - Vec3(0.5, 0.5, p.z())).norm() <= radius + 1e-12;
    };
    // lateral
    s.sets.push_back(sampled(
        SurfacePrimitive{Cylinder{Vec3(0.5, 0.5, 0.0), Vec3::UnitZ(), radius}}, ad,
        box(Vec3(0.3, 0.3, z0), Vec3(0.7, 0.7, z1))));
    // caps (plane patches trimmed to the disk)
    for (double z : {z0, z1}) {
        s.sets.push_back(filtered(
            sampled(SurfacePrimitive{Plane{Vec3::UnitZ(), z}}, ad,
                    box(Vec3(0.3, 0.3, z), Vec3(0.7, 0.7, z))),
            inside));
    }
    s.n_surface_sets = int(s.sets.size());
    // rim circles
    for (double z : {z0, z1}) {
        s.sets.push_back(sampled(
            CurvePrimitive{Circle{Vec3(0.5, 0.5, z), Vec3::UnitZ(), radius}}, ld));
    }
    (void)c;
    pool(s);
    add_noise(s.surface_points, sigma, 20240815);
    return s;
}

Scene scene_sphere_plane(int r) {
    Scene s;
    s.name = "sphere-plane";
    const Vec3 center(0.5, 0.5, 0.45);
    const double radius = 0.3, zcut = 0.2;
    const double rim = std::sqrt(radius * radius - (center.z() - zcut) * (center.z() - zcut));
    const double ad = area_density(r), ld = len_density(r);
    // dome
    s.sets.push_back(filtered(
        sampled(SurfacePrimitive{Sphere{center, radius}}, ad),
        [&](const Vec3& p) { return p.z() >= zcut; }));
    // base disk
    s.sets.push_back(filtered(
        sampled(SurfacePrimitive{Plane{Vec3::UnitZ(), zcut}}, ad,
                box(Vec3(0.5 - rim - 0.02, 0.5 - rim - 0.02, zcut),
                    Vec3(0.5 + rim + 0.02, 0.5 + rim + 0.02, zcut))),
        [&](const Vec3& p) {
            return (p - Vec3(0.5, 0.5, zcut)).norm() <= rim + 1e-12;
        }));
    s.n_surface_sets = int(s.sets.size());
    // rim circle
    s.sets.push_back(sampled(
        CurvePrimitive{Circle{Vec3(0.5, 0.5, zcut), Vec3::UnitZ(), rim}}, ld));
    pool(s);
    return s;
}

Scene scene_cone_plane(int r) {
    Scene s;
    s.name = "cone-plane";
    const Vec3 apex(0.5, 0.5, 0.8);
    const Vec3 axis = -Vec3::UnitZ();
    const double half_angle = 0.4, zbase = 0.2;
    const double base_rho = (apex.z() - zbase) * std::tan(half_angle);
    const double ad = area_density(r), ld = len_density(r);
    // lateral
    s.sets.push_back(filtered(
        sampled(SurfacePrimitive{Cone{apex, axis, half_angle}}, ad,
                box(Vec3(0.2, 0.2, zbase), Vec3(0.8, 0.8, 0.8))),
        [&](const Vec3& p) { return p.z() >= zbase - 1e-12; }));
    // base disk
    s.sets.push_back(filtered(
        sampled(SurfacePrimitive{Plane{Vec3::UnitZ(), zbase}}, ad,
                box(Vec3(0.5 - base_rho - 0.02, 0.5 - base_rho - 0.02, zbase),
                    Vec3(0.5 + base_rho + 0.02, 0.5 + base_rho + 0.02, zbase))),
        [&](const Vec3& p) {
            return (p - Vec3(0.5, 0.5, zbase)).norm() <= base_rho + 1e-12;
        }));
    s.n_surface_sets = int(s.sets.size());
    // rim circle
    s.sets.push_back(sampled(
        CurvePrimitive{Circle{Vec3(0.5, 0.5, zbase), Vec3::UnitZ(), base_rho}}, ld));
    // apex vertex
    s.sets.push_back({apex});
    pool(s);
    return s;
}

std::vector<Scene> all_scenes(int r) {
    return {scene_two_planes(r), scene_cube(r), scene_capped_cylinder(r),
            scene_sphere_plane(r), scene_cone_plane(r)};
}

BRepFile gt_cube_brep() {
    BRepFile f;
    BRepModel& m = f.model;
    const double lo = 0.25, hi = 0.75;
    // 6 faces in (axis, offset) order: -x is surface 0, +x is 1, ...
    std::vector<std::pair<int, double>> faces;
    for (int ax = 0; ax < 3; ++ax) {
        for (double off : {lo, hi}) {
            Vec3 n = Vec3::Zero();
            n[ax] = 1;
            m.surfaces.push_back(Plane{n, off});
            faces.push_back({ax, off});
        }
    }
    // 12 edges in the scene_cube order; remember their (axis, v1, v2)
    struct Edge {
        int ax;
        double v1, v2;  // coordinates on axes (ax+1)%3 and (ax+2)%3
    };
    std::vector<Edge> edges;
    for (int ax = 0; ax < 3; ++ax) {
        for (double v1 : {lo, hi}) {
            for (double v2 : {lo, hi}) {
                Vec3 p = Vec3::Zero();
                p[ax] = lo;
                p[(ax + 1) % 3] = v1;
                p[(ax + 2) % 3] = v2;
                Vec3 d = Vec3::Zero();
                d[ax] = 1;
                m.curves.push_back(Line{p, d});
                edges.push_back({ax, v1, v2});
            }
        }
    }
    for (double x : {lo, hi}) {
        for (double y : {lo, hi}) {
            for (double z : {lo, hi}) {
                m.vertices.push_back(Vec3(x, y, z));
            }
        }
    }
    const int nf = 6, ne = 12, nv = 8;
    m.FF = BoolMatrix(nf, nf);
    m.FE = BoolMatrix(nf, ne);
    m.EE = BoolMatrix(ne, ne);
    m.EV = BoolMatrix(ne, nv);
    m.FV = BoolMatrix(nf, nv);
    auto face_of = [&](int ax, double off) {
        return 2 * ax + (off == hi ? 1 : 0);
    };
    // FE: edge (ax, v1, v2) lies on faces (ax+1, v1) and (ax+2, v2)
    for (int e = 0; e < ne; ++e) {
        const Edge& ed = edges[e];
        m.FE.set(face_of((ed.ax + 1) % 3, ed.v1), e);
        m.FE.set(face_of((ed.ax + 2) % 3, ed.v2), e);
    }
    // FF: faces sharing an edge
    for (int e = 0; e < ne; ++e) {
        for (int f1 = 0; f1 < nf; ++f1) {
            for (int f2 = f1 + 1; f2 < nf; ++f2) {
                if (m.FE.at(f1, e) && m.FE.at(f2, e)) m.FF.set_sym(f1, f2);
            }
        }
    }
    // EV: edge endpoints; vertex index from (x, y, z) bits
    auto vertex_of = [&](double x, double y, double z) {
        return 4 * (x == hi) + 2 * (y == hi) + (z == hi);
    };
    for (int e = 0; e < ne; ++e) {
        const Edge& ed = edges[e];
        for (double v0 : {lo, hi}) {
            double c[3];
            c[ed.ax] = v0;
            c[(ed.ax + 1) % 3] = ed.v1;
            c[(ed.ax + 2) % 3] = ed.v2;
            m.EV.set(e, vertex_of(c[0], c[1], c[2]));
        }
    }
    // EE: edges sharing a vertex
    for (int v = 0; v < nv; ++v) {
        for (int e1 = 0; e1 < ne; ++e1) {
            for (int e2 = e1 + 1; e2 < ne; ++e2) {
                if (m.EV.at(e1, v) && m.EV.at(e2, v)) m.EE.set_sym(e1, e2);
            }
        }
    }
    // FV = FE o EV
    for (int fidx = 0; fidx < nf; ++fidx) {
        for (int e = 0; e < ne; ++e) {
            if (!m.FE.at(fidx, e)) continue;
            for (int v = 0; v < nv; ++v) {
                if (m.EV.at(e, v)) m.FV.set(fidx, v);
            }
        }
    }
    return f;
}

BRepFile gt_capped_cylinder_brep() {
    BRepFile f;
    BRepModel& m = f.model;
    const double radius = 0.2, z0 = 0.2, z1 = 0.8;
    m.surfaces.push_back(Plane{Vec3::UnitZ(), z0});
    m.surfaces.push_back(Plane{Vec3::UnitZ(), z1});
    m.surfaces.push_back(Cylinder{Vec3(0.5, 0.5, 0.0), Vec3::UnitZ(), radius});
    m.curves.push_back(Circle{Vec3(0.5, 0.5, z0), Vec3::UnitZ(), radius});
    m.curves.push_back(Circle{Vec3(0.5, 0.5, z1), Vec3::UnitZ(), radius});
    m.FF = BoolMatrix(3, 3);
    m.FF.set_sym(0, 2);
    m.FF.set_sym(1, 2);
    m.FE = BoolMatrix(3, 2);
    m.FE.set(0, 0);
    m.FE.set(2, 0);
    m.FE.set(1, 1);
    m.FE.set(2, 1);
    m.EE = BoolMatrix(2, 2);
    m.EV = BoolMatrix(2, 0);
    m.FV = BoolMatrix(3, 0);
    return f;
}

}  // namespace splitfit::fixtures
