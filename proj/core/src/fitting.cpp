#include "splitfit/fitting.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

namespace splitfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTol = 1e-9;

Vec3 centroid(const std::vector<Vec3>& pts) {
    Vec3 c = Vec3::Zero();
    for (const Vec3& p : pts) c += p;
    return c / double(pts.size());
}

Eigen::Matrix3d covariance(const std::vector<Vec3>& pts, const Vec3& mean) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (const Vec3& p : pts) {
        const Vec3 v = p - mean;
        m += v * v.transpose();
    }
    return m / double(pts.size());
}

/// Deterministic stride subsample used to bound refinement cost on big cells.
std::vector<Vec3> subsample(const std::vector<Vec3>& pts, std::size_t cap) {
    if (pts.size() <= cap) return pts;
    std::vector<Vec3> out;
    out.reserve(cap);
    const double step = double(pts.size()) / double(cap);
    for (std::size_t i = 0; i < cap; ++i) out.push_back(pts[std::size_t(i * step)]);
    return out;
}

constexpr std::size_t kFitCap = 2000;
// The ellipse residual needs a bisection per point per evaluation, so its
// refinement runs on a smaller subsample.
constexpr std::size_t kEllipseCap = 512;

// --- Levenberg-Marquardt with numeric Jacobians --------------------------

using ResidualFn = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LmResult {
    bool converged = false;
    double rms = kInf;
};

LmResult lm_minimize(const ResidualFn& fn, Eigen::VectorXd& x, int n_res,
                     int max_iter = 100, double step_tol = 1e-10) {
    const int n = int(x.size());
    Eigen::VectorXd r(n_res), r_try(n_res);
    fn(x, r);
    if (!r.allFinite()) return {};
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    LmResult res;

    for (int iter = 0; iter < max_iter; ++iter) {
        // central-difference Jacobian
        Eigen::MatrixXd J(n_res, n);
        Eigen::VectorXd rp(n_res), rm(n_res);
        for (int j = 0; j < n; ++j) {
            const double h = 1e-7 * (1.0 + std::abs(x[j]));
            Eigen::VectorXd xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            fn(xp, rp);
            fn(xm, rm);
            J.col(j) = (rp - rm) / (2 * h);
        }
        const Eigen::MatrixXd jtj = J.transpose() * J;
        const Eigen::VectorXd jtr = J.transpose() * r;

        bool accepted = false;
        for (int tries = 0; tries < 24 && !accepted; ++tries) {
            Eigen::MatrixXd a = jtj;
            a.diagonal().array() += lambda;
            const Eigen::VectorXd step = a.ldlt().solve(-jtr);
            if (!step.allFinite()) {
                lambda *= 4;
                continue;
            }
            const Eigen::VectorXd x_try = x + step;
            fn(x_try, r_try);
            const double cost_try = r_try.allFinite() ? r_try.squaredNorm() : kInf;
            if (cost_try < cost) {
                const double rel_drop = (cost - cost_try) / std::max(cost, 1e-300);
                x = x_try;
                r = r_try;
                cost = cost_try;
                lambda = std::max(lambda / 3, 1e-12);
                accepted = true;
                // ftol: healthy convergence shows large relative drops until
                // the floor, so a sub-1e-6 drop means the plateau is reached.
                if (step.norm() < step_tol * (1.0 + x.norm()) || rel_drop < 1e-6) {
                    res.converged = true;
                }
            } else {
                lambda *= 4;
                if (step.norm() < step_tol) {
                    res.converged = true;  // cannot move: at a local minimum
                    accepted = true;
                }
            }
        }
        if (!accepted) res.converged = true;  // damping saturated
        if (res.converged) break;
    }
    res.rms = std::sqrt(cost / n_res);
    return res;
}

// --- closed-form fits ----------------------------------------------------

FitResult make_surface_result(SurfacePrimitive prim,
                              const std::vector<Vec3>& all_points,
                              bool rank_deficient = false) {
    canonicalize(prim);
    FitResult r;
    r.rms = rms_distance(prim, all_points);
    r.primitive = prim;
    r.inlier_count = int(all_points.size());
    r.rank_deficient = rank_deficient;
    return r;
}

FitResult make_curve_result(CurvePrimitive prim, const std::vector<Vec3>& all_points,
                            bool rank_deficient = false) {
    canonicalize(prim);
    FitResult r;
    r.rms = rms_distance(prim, all_points);
    r.primitive = prim;
    r.inlier_count = int(all_points.size());
    r.rank_deficient = rank_deficient;
    return r;
}

FitResult failed_surface(SurfacePrimitive prim, int count) {
    FitResult r;
    r.primitive = prim;
    r.rms = kInf;
    r.inlier_count = count;
    return r;
}

struct PlaneBasis {
    Plane plane;
    Vec3 u, v;  // in-plane orthonormal axes
    bool rank_deficient = false;
};

PlaneBasis fit_plane_basis(const std::vector<Vec3>& pts) {
    const Vec3 mean = centroid(pts);
    const Eigen::Matrix3d cov = covariance(pts, mean);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    PlaneBasis pb;
    pb.plane.normal = eig.eigenvectors().col(0).normalized();
    pb.plane.offset = pb.plane.normal.dot(mean);
    pb.u = eig.eigenvectors().col(2).normalized();
    pb.v = pb.plane.normal.cross(pb.u);
    const double scale = std::max(eig.eigenvalues()(2), 1e-300);
    pb.rank_deficient = eig.eigenvalues()(1) < 1e-12 * scale;
    return pb;
}

Sphere fit_sphere_algebraic(const std::vector<Vec3>& pts) {
    Eigen::MatrixXd a(pts.size(), 4);
    Eigen::VectorXd b(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        a.row(i) << 2 * pts[i].x(), 2 * pts[i].y(), 2 * pts[i].z(), 1.0;
        b[i] = pts[i].squaredNorm();
    }
    const Eigen::Vector4d s = a.colPivHouseholderQr().solve(b);
    Sphere sp;
    sp.center = s.head<3>();
    sp.radius = std::sqrt(std::max(1e-300, s[3] + sp.center.squaredNorm()));
    return sp;
}

/// In-plane algebraic circle fit (Kasa): returns 2D center and radius.
bool fit_circle_2d(const std::vector<Eigen::Vector2d>& uv, Eigen::Vector2d& center,
                   double& radius) {
    Eigen::MatrixXd a(uv.size(), 3);
    Eigen::VectorXd b(uv.size());
    for (std::size_t i = 0; i < uv.size(); ++i) {
        a.row(i) << 2 * uv[i].x(), 2 * uv[i].y(), 1.0;
        b[i] = uv[i].squaredNorm();
    }
    const Eigen::Vector3d s = a.colPivHouseholderQr().solve(b);
    center = s.head<2>();
    const double r2 = s[2] + center.squaredNorm();
    if (!(r2 > 0) || !std::isfinite(r2)) return false;
    radius = std::sqrt(r2);
    return true;
}

// --- iterative surface fits ----------------------------------------------

/// Per-point normals by local PCA over a strided seed subset; the smallest
/// eigenvector of their covariance estimates the cylinder axis (normals of a
/// cylinder span the plane orthogonal to it).
Vec3 axis_from_normals(const std::vector<Vec3>& pts) {
    const int n = int(pts.size());
    const int n_seeds = std::min(96, n);
    const int k = std::min(16, n - 1);
    Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
    for (int s = 0; s < n_seeds; ++s) {
        const Vec3& q = pts[std::size_t(s) * n / n_seeds];
        // k nearest by partial selection
        std::vector<std::pair<double, int>> d2(n);
        for (int i = 0; i < n; ++i) d2[i] = {(pts[i] - q).squaredNorm(), i};
        std::nth_element(d2.begin(), d2.begin() + k, d2.end());
        std::vector<Vec3> local;
        local.reserve(k + 1);
        for (int i = 0; i <= k; ++i) local.push_back(pts[d2[i].second]);
        const Vec3 m = centroid(local);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(covariance(local, m));
        const Vec3 nrm = eig.eigenvectors().col(0);
        acc += nrm * nrm.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(acc);
    return eig.eigenvectors().col(0).normalized();
}

struct CylinderInit {
    Cylinder cyl;
    double score = kInf;  // in-plane circle rms
};

CylinderInit cylinder_init(const std::vector<Vec3>& pts) {
    const Vec3 mean = centroid(pts);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(covariance(pts, mean));
    std::vector<Vec3> candidates = {eig.eigenvectors().col(0),
                                    eig.eigenvectors().col(1),
                                    eig.eigenvectors().col(2),
                                    axis_from_normals(pts)};
    CylinderInit best;
    for (const Vec3& axis_raw : candidates) {
        const Vec3 axis = axis_raw.normalized();
        const auto [u, v] = any_orthonormal(axis);
        std::vector<Eigen::Vector2d> uv;
        uv.reserve(pts.size());
        for (const Vec3& p : pts) {
            const Vec3 d = p - mean;
            uv.emplace_back(d.dot(u), d.dot(v));
        }
        Eigen::Vector2d c2;
        double radius;
        if (!fit_circle_2d(uv, c2, radius)) continue;
        double sq = 0;
        for (const auto& p : uv) sq += std::pow((p - c2).norm() - radius, 2);
        const double rms = std::sqrt(sq / uv.size());
        if (rms < best.score) {
            best.score = rms;
            best.cyl.axis = axis;
            best.cyl.point = mean + c2.x() * u + c2.y() * v;
            best.cyl.radius = radius;
        }
    }
    return best;
}

FitResult fit_cylinder(const std::vector<Vec3>& all_pts) {
    const std::vector<Vec3> pts = subsample(all_pts, kFitCap);
    CylinderInit init = cylinder_init(pts);
    if (!std::isfinite(init.score))
        return failed_surface(init.cyl, int(all_pts.size()));

    Eigen::VectorXd x(7);
    x << init.cyl.point.x(), init.cyl.point.y(), init.cyl.point.z(),
        init.cyl.axis.x(), init.cyl.axis.y(), init.cyl.axis.z(), init.cyl.radius;
    auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        Cylinder c{{p[0], p[1], p[2]}, Vec3(p[3], p[4], p[5]).normalized(), p[6]};
        SurfacePrimitive s = c;
        for (std::size_t i = 0; i < pts.size(); ++i) r[int(i)] = distance(s, pts[i]);
    };
    const LmResult lm = lm_minimize(residuals, x, int(pts.size()));
    Cylinder c{{x[0], x[1], x[2]}, Vec3(x[3], x[4], x[5]).normalized(), x[6]};
    if (!lm.converged || !(c.radius > 0) || !std::isfinite(c.radius))
        return failed_surface(c, int(all_pts.size()));
    // re-anchor the axis point next to the data
    const Vec3 mean = centroid(pts);
    c.point += (mean - c.point).dot(c.axis) * c.axis;
    return make_surface_result(c, all_pts);
}

FitResult fit_cone(const std::vector<Vec3>& all_pts) {
    const std::vector<Vec3> pts = subsample(all_pts, kFitCap);
    const CylinderInit ci = cylinder_init(pts);
    if (!std::isfinite(ci.score))
        return failed_surface(Cone{}, int(all_pts.size()));

    // radius-vs-height regression along the candidate axis locates the apex
    Vec3 axis = ci.cyl.axis;
    const Vec3 base = ci.cyl.point;
    double sh = 0, srho = 0, shh = 0, shrho = 0;
    for (const Vec3& p : pts) {
        const Vec3 v = p - base;
        const double h = v.dot(axis);
        const double rho = (v - h * axis).norm();
        sh += h;
        srho += rho;
        shh += h * h;
        shrho += h * rho;
    }
    const double n = double(pts.size());
    const double denom = n * shh - sh * sh;
    double slope = std::abs(denom) > 1e-300 ? (n * shrho - sh * srho) / denom : 0.0;
    if (slope < 0) {
        axis = -axis;
        slope = -slope;
        sh = -sh;
        shrho = -shrho;
    }
    if (slope < 1e-6) slope = 0.2;  // near-cylindrical data: give LM a nudge
    const double intercept = (srho - slope * sh) / n;
    const double h_apex = -intercept / slope;
    Cone init;
    init.apex = base + h_apex * axis;
    init.axis = axis;
    init.half_angle = std::clamp(std::atan(slope), 0.02, M_PI / 2 - 0.02);

    Eigen::VectorXd x(7);
    x << init.apex.x(), init.apex.y(), init.apex.z(), init.axis.x(), init.axis.y(),
        init.axis.z(), init.half_angle;
    auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        Cone c{{p[0], p[1], p[2]}, Vec3(p[3], p[4], p[5]).normalized(), p[6]};
        if (c.half_angle <= 0 || c.half_angle >= M_PI / 2) {
            r.setConstant(kInf);
            return;
        }
        SurfacePrimitive s = c;
        for (std::size_t i = 0; i < pts.size(); ++i) r[int(i)] = distance(s, pts[i]);
    };
    const LmResult lm = lm_minimize(residuals, x, int(pts.size()));
    Cone c{{x[0], x[1], x[2]}, Vec3(x[3], x[4], x[5]).normalized(), x[6]};
    if (!lm.converged || !(c.half_angle > 0) || !(c.half_angle < M_PI / 2))
        return failed_surface(c, int(all_pts.size()));
    return make_surface_result(c, all_pts);
}

FitResult fit_torus(const std::vector<Vec3>& all_pts) {
    const std::vector<Vec3> pts = subsample(all_pts, kFitCap);
    const PlaneBasis pb = fit_plane_basis(pts);
    const Vec3 mean = centroid(pts);

    std::vector<Eigen::Vector2d> uv;
    uv.reserve(pts.size());
    for (const Vec3& p : pts) {
        const Vec3 d = p - mean;
        uv.emplace_back(d.dot(pb.u), d.dot(pb.v));
    }
    Eigen::Vector2d c2(0, 0);
    double ring = 0.0;
    if (!fit_circle_2d(uv, c2, ring))
        return failed_surface(Torus{}, int(all_pts.size()));
    Torus init;
    init.axis = pb.plane.normal;
    init.center = mean + c2.x() * pb.u + c2.y() * pb.v;
    init.major_radius = ring;
    double acc = 0;
    for (const Vec3& p : pts) {
        const Vec3 v = p - init.center;
        const double h = v.dot(init.axis);
        const double rho = (v - h * init.axis).norm();
        acc += std::hypot(rho - init.major_radius, h);
    }
    init.minor_radius = std::max(acc / pts.size(), 1e-4);
    if (init.minor_radius >= init.major_radius)
        init.major_radius = init.minor_radius * 2;

    Eigen::VectorXd x(8);
    x << init.center.x(), init.center.y(), init.center.z(), init.axis.x(),
        init.axis.y(), init.axis.z(), init.major_radius, init.minor_radius;
    auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        Torus t{{p[0], p[1], p[2]}, Vec3(p[3], p[4], p[5]).normalized(), p[6], p[7]};
        if (!(t.minor_radius > 0) || !(t.major_radius > t.minor_radius)) {
            r.setConstant(kInf);
            return;
        }
        SurfacePrimitive s = t;
        for (std::size_t i = 0; i < pts.size(); ++i) r[int(i)] = distance(s, pts[i]);
    };
    const LmResult lm = lm_minimize(residuals, x, int(pts.size()));
    Torus t{{x[0], x[1], x[2]}, Vec3(x[3], x[4], x[5]).normalized(), x[6], x[7]};
    if (!lm.converged || !(t.minor_radius > 0) || !(t.major_radius > t.minor_radius))
        return failed_surface(t, int(all_pts.size()));
    return make_surface_result(t, all_pts);
}

// --- curve fits ----------------------------------------------------------

FitResult fit_line(const std::vector<Vec3>& pts) {
    const Vec3 mean = centroid(pts);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(covariance(pts, mean));
    Line l;
    l.point = mean;
    l.direction = eig.eigenvectors().col(2).normalized();
    const bool deficient = eig.eigenvalues()(2) < 1e-24;  // coincident points
    return make_curve_result(l, pts, deficient);
}

FitResult fit_circle3d(const std::vector<Vec3>& all_pts) {
    const std::vector<Vec3> pts = subsample(all_pts, kFitCap);
    const PlaneBasis pb = fit_plane_basis(pts);
    const Vec3 mean = centroid(pts);
    std::vector<Eigen::Vector2d> uv;
    uv.reserve(pts.size());
    for (const Vec3& p : pts) {
        const Vec3 d = p - mean;
        uv.emplace_back(d.dot(pb.u), d.dot(pb.v));
    }
    Eigen::Vector2d c2;
    double radius;
    if (!fit_circle_2d(uv, c2, radius)) {
        FitResult f;
        f.primitive = CurvePrimitive(Circle{});
        f.rms = kInf;
        f.inlier_count = int(all_pts.size());
        return f;
    }
    Circle init;
    init.center = mean + c2.x() * pb.u + c2.y() * pb.v;
    init.normal = pb.plane.normal;
    init.radius = radius;

    Eigen::VectorXd x(7);
    x << init.center.x(), init.center.y(), init.center.z(), init.normal.x(),
        init.normal.y(), init.normal.z(), init.radius;
    auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        Circle c{{p[0], p[1], p[2]}, Vec3(p[3], p[4], p[5]).normalized(), p[6]};
        if (!(c.radius > 0)) {
            r.setConstant(kInf);
            return;
        }
        CurvePrimitive cp = c;
        for (std::size_t i = 0; i < pts.size(); ++i) r[int(i)] = distance(cp, pts[i]);
    };
    const LmResult lm = lm_minimize(residuals, x, int(pts.size()));
    Circle c{{x[0], x[1], x[2]}, Vec3(x[3], x[4], x[5]).normalized(), x[6]};
    if (!lm.converged || !(c.radius > 0) || !std::isfinite(c.radius)) {
        FitResult f;
        f.primitive = CurvePrimitive(c);
        f.rms = kInf;
        f.inlier_count = int(all_pts.size());
        return f;
    }
    return make_curve_result(c, all_pts);
}

/// Direct conic fit constrained to ellipses (Halir & Flusser formulation),
/// in the support plane, followed by geometric refinement.
FitResult fit_ellipse3d(const std::vector<Vec3>& all_pts) {
    const std::vector<Vec3> pts = subsample(all_pts, kEllipseCap);
    const PlaneBasis pb = fit_plane_basis(pts);
    const Vec3 mean = centroid(pts);
    const std::size_t n = pts.size();
    Eigen::MatrixXd d1(n, 3), d2(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 d = pts[i] - mean;
        const double u = d.dot(pb.u), v = d.dot(pb.v);
        d1.row(i) << u * u, u * v, v * v;
        d2.row(i) << u, v, 1.0;
    }
    const Eigen::Matrix3d s1 = d1.transpose() * d1;
    const Eigen::Matrix3d s2 = d1.transpose() * d2;
    const Eigen::Matrix3d s3 = d2.transpose() * d2;
    const Eigen::Matrix3d t = -s3.ldlt().solve(s2.transpose());
    const Eigen::Matrix3d m0 = s1 + s2 * t;
    Eigen::Matrix3d m;
    m.row(0) = m0.row(2) / 2;
    m.row(1) = -m0.row(1);
    m.row(2) = m0.row(0) / 2;
    Eigen::EigenSolver<Eigen::Matrix3d> eig(m);

    auto invalid = [&]() {
        FitResult f;
        f.primitive = CurvePrimitive(Ellipse{});
        f.rms = kInf;
        f.inlier_count = int(all_pts.size());
        return f;
    };

    Eigen::Vector3d a1 = Eigen::Vector3d::Zero();
    bool found = false;
    for (int i = 0; i < 3; ++i) {
        if (std::abs(eig.eigenvalues()[i].imag()) > 1e-12) continue;
        const Eigen::Vector3d v = eig.eigenvectors().col(i).real();
        if (4 * v[0] * v[2] - v[1] * v[1] > 0) {
            a1 = v;
            found = true;
            break;
        }
    }
    if (!found) return invalid();
    const Eigen::Vector3d a2 = t * a1;
    double A = a1[0], B = a1[1], C = a1[2], D = a2[0], E = a2[1], F = a2[2];

    // conic -> center, axes, orientation
    const double det = 4 * A * C - B * B;
    if (det <= 0) return invalid();
    const double cx = (B * E - 2 * C * D) / det;
    const double cy = (B * D - 2 * A * E) / det;
    double fc = A * cx * cx + B * cx * cy + C * cy * cy + D * cx + E * cy + F;
    if (fc > 0) {  // sign-normalize the conic
        A = -A, B = -B, C = -C, D = -D, E = -E, F = -F, fc = -fc;
    }
    Eigen::Matrix2d q;
    q << A, B / 2, B / 2, C;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> qe(q);
    const double l0 = qe.eigenvalues()(0), l1 = qe.eigenvalues()(1);
    if (!(l0 > 0) || !(l1 > 0) || !(fc < 0)) return invalid();
    const double sa = std::sqrt(-fc / l0);
    const double sb = std::sqrt(-fc / l1);
    Eigen::Vector2d dir_a = qe.eigenvectors().col(0);  // eigenvector of smaller |lambda| -> longer axis
    Ellipse init;
    init.center = mean + cx * pb.u + cy * pb.v;
    init.normal = pb.plane.normal;
    if (sa >= sb) {
        init.a = sa;
        init.b = sb;
    } else {
        init.a = sb;
        init.b = sa;
        dir_a = qe.eigenvectors().col(1);
    }
    Vec3 major = (dir_a.x() * pb.u + dir_a.y() * pb.v).normalized();
    major = (major - major.dot(init.normal) * init.normal).normalized();
    init.major_axis = major;

    Eigen::VectorXd x(11);
    x << init.center.x(), init.center.y(), init.center.z(), init.normal.x(),
        init.normal.y(), init.normal.z(), init.major_axis.x(), init.major_axis.y(),
        init.major_axis.z(), init.a, init.b;
    auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        const Vec3 nrm = Vec3(p[3], p[4], p[5]).normalized();
        Vec3 maj = Vec3(p[6], p[7], p[8]);
        maj = (maj - maj.dot(nrm) * nrm);
        const double mn = maj.norm();
        if (mn < 1e-12 || !(p[9] > 0) || !(p[10] > 0) || p[10] > p[9] * (1 + 1e-9)) {
            r.setConstant(kInf);
            return;
        }
        Ellipse e{{p[0], p[1], p[2]}, nrm, maj / mn, p[9], p[10]};
        CurvePrimitive cp = e;
        for (std::size_t i = 0; i < pts.size(); ++i)
            r[int(i)] = distance(cp, pts[i]);
    };
    // 40 iterations: the direct conic init lands close, and hopeless fits
    // (2D point sets) should fail fast.
    const LmResult lm = lm_minimize(residuals, x, int(pts.size()), 40);
    const Vec3 nrm = Vec3(x[3], x[4], x[5]).normalized();
    Vec3 maj = Vec3(x[6], x[7], x[8]);
    maj = (maj - maj.dot(nrm) * nrm).normalized();
    Ellipse e{{x[0], x[1], x[2]}, nrm, maj, x[9], x[10]};
    if (!lm.converged || !(e.b > 0) || !(e.a >= e.b)) return invalid();
    return make_curve_result(e, all_pts);
}

int min_points(SurfaceKind k) {
    switch (k) {
        case SurfaceKind::Plane: return 3;
        case SurfaceKind::Sphere: return 4;
        case SurfaceKind::Cylinder: return 6;
        case SurfaceKind::Cone: return 6;
        case SurfaceKind::Torus: return 7;
    }
    return 3;
}

int min_points(CurveKind k) {
    switch (k) {
        case CurveKind::Line: return 2;
        case CurveKind::Circle: return 3;
        case CurveKind::Ellipse: return 5;
    }
    return 2;
}

}  // namespace

double rms_distance(const SurfacePrimitive& s, const std::vector<Vec3>& points) {
    double acc = 0;
    for (const Vec3& p : points) {
        const double d = distance(s, p);
        acc += d * d;
    }
    return std::sqrt(acc / std::max<std::size_t>(points.size(), 1));
}

double rms_distance(const CurvePrimitive& c, const std::vector<Vec3>& points) {
    double acc = 0;
    for (const Vec3& p : points) {
        const double d = distance(c, p);
        acc += d * d;
    }
    return std::sqrt(acc / std::max<std::size_t>(points.size(), 1));
}

FitResult fit_surface(const std::vector<Vec3>& points, SurfaceKind kind) {
    if (int(points.size()) < min_points(kind))
        throw TooFewPoints("fit_surface: need at least " +
                           std::to_string(min_points(kind)) + " points for " +
                           kind_name(kind));
    switch (kind) {
        case SurfaceKind::Plane: {
            const PlaneBasis pb = fit_plane_basis(points);
            return make_surface_result(pb.plane, points, pb.rank_deficient);
        }
        case SurfaceKind::Sphere: {
            const Sphere init = fit_sphere_algebraic(points);
            const std::vector<Vec3> pts = subsample(points, kFitCap);
            Eigen::VectorXd x(4);
            x << init.center.x(), init.center.y(), init.center.z(), init.radius;
            auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
                if (!(p[3] > 0)) {
                    r.setConstant(kInf);
                    return;
                }
                SurfacePrimitive s = Sphere{{p[0], p[1], p[2]}, p[3]};
                for (std::size_t i = 0; i < pts.size(); ++i)
                    r[int(i)] = distance(s, pts[i]);
            };
            const LmResult lm = lm_minimize(residuals, x, int(pts.size()));
            Sphere s{{x[0], x[1], x[2]}, x[3]};
            if (!lm.converged || !(s.radius > 0) || !std::isfinite(s.radius))
                return failed_surface(s, int(points.size()));
            return make_surface_result(s, points);
        }
        case SurfaceKind::Cylinder: return fit_cylinder(points);
        case SurfaceKind::Cone: return fit_cone(points);
        case SurfaceKind::Torus: return fit_torus(points);
    }
    throw AllKindsFailed("fit_surface: unknown kind");
}

FitResult fit_curve(const std::vector<Vec3>& points, CurveKind kind) {
    if (int(points.size()) < min_points(kind))
        throw TooFewPoints("fit_curve: need at least " +
                           std::to_string(min_points(kind)) + " points for " +
                           kind_name(kind));
    switch (kind) {
        case CurveKind::Line: return fit_line(points);
        case CurveKind::Circle: return fit_circle3d(points);
        case CurveKind::Ellipse: return fit_ellipse3d(points);
    }
    throw AllKindsFailed("fit_curve: unknown kind");
}

namespace {

// Kinds are tried simplest-first; a later (richer) kind replaces the current
// best only if it clears a 20% relative margin, and never once the simpler
// kind already fits at sub-tolerance rms. With strict minimal-rms selection a
// degenerate ellipse shaves an epsilon off the noise-floor rms of collinear
// data and wins over the true line — same issue as the barely-curved quadric
// in ransac_multi, and no relative margin alone resolves a tie between two
// fits that are both at the numerical noise floor.
constexpr double kPerfectRms = 1e-5;

template <typename Kind, typename FitFn>
FitResult best_of(const std::vector<Kind>& kinds,
                  const std::vector<double>& margin, const FitFn& fit) {
    bool any = false;
    FitResult best;
    best.rms = kInf;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (best.rms < kPerfectRms) break;
        FitResult r;
        try {
            r = fit(kinds[i]);
        } catch (const TooFewPoints&) {
            continue;
        }
        any = true;
        if (r.rms < margin[i] * best.rms - kTieTol) best = r;
    }
    if (!any) throw AllKindsFailed("no primitive kind accepts this point count");
    return best;
}

}  // namespace

FitResult fit_best_surface(const std::vector<Vec3>& points) {
    static const std::vector<SurfaceKind> order = {
        SurfaceKind::Plane, SurfaceKind::Sphere, SurfaceKind::Cylinder,
        SurfaceKind::Cone, SurfaceKind::Torus};
    static const std::vector<double> margin = {1.0, 0.8, 0.8, 0.8, 0.8};
    return best_of(order, margin,
                   [&](SurfaceKind k) { return fit_surface(points, k); });
}

FitResult fit_best_curve(const std::vector<Vec3>& points) {
    static const std::vector<CurveKind> order = {CurveKind::Line, CurveKind::Circle,
                                                 CurveKind::Ellipse};
    static const std::vector<double> margin = {1.0, 0.8, 0.8};
    return best_of(order, margin,
                   [&](CurveKind k) { return fit_curve(points, k); });
}

std::vector<FitResult> ransac_multi(const std::vector<Vec3>& points, double eps1,
                                    std::uint64_t seed) {
    if (points.size() < 10)
        throw NoModelFound("ransac_multi: need at least 10 points");
    const double inlier_dist = 5.0 * eps1;
    const std::size_t stop_count = std::max<std::size_t>(5, points.size() / 20);
    constexpr int kTrialsPerKind = 48;
    static const std::vector<SurfaceKind> kinds = {
        SurfaceKind::Plane, SurfaceKind::Sphere, SurfaceKind::Cylinder,
        SurfaceKind::Cone, SurfaceKind::Torus};

    std::mt19937_64 rng(seed ^ 0x5f3759df9e3779b9ull);
    std::vector<Vec3> remaining = points;
    std::vector<FitResult> models;

    for (int round = 0; round < 10 && remaining.size() >= stop_count; ++round) {
        SurfacePrimitive best_prim = Plane{};
        int best_inliers = 0;
        double best_score = 0;
        // Richer models must beat simpler ones by a clear inlier margin:
        // a barely-curved quadric can edge out the true plane by absorbing
        // stray points from a neighboring surface.
        auto kind_pref = [](SurfaceKind k) {
            switch (k) {
                case SurfaceKind::Plane: return 1.0;
                case SurfaceKind::Sphere:
                case SurfaceKind::Cylinder: return 0.9;
                default: return 0.85;
            }
        };
        for (const SurfaceKind kind : kinds) {
            const int need = min_points(kind);
            if (int(remaining.size()) < need) continue;
            for (int trial = 0; trial < kTrialsPerKind; ++trial) {
                std::vector<Vec3> sample;
                sample.reserve(need);
                std::uniform_int_distribution<std::size_t> pick(0, remaining.size() - 1);
                for (int j = 0; j < need; ++j) sample.push_back(remaining[pick(rng)]);
                FitResult cand;
                try {
                    cand = fit_surface(sample, kind);
                } catch (const TooFewPoints&) {
                    continue;
                }
                if (!std::isfinite(cand.rms)) continue;
                int inliers = 0;
                for (const Vec3& p : remaining)
                    if (distance(cand.surface(), p) < inlier_dist) ++inliers;
                const double score = inliers * kind_pref(kind);
                if (score > best_score) {
                    best_score = score;
                    best_inliers = inliers;
                    best_prim = cand.surface();
                }
            }
        }
        const int minimal = min_points(SurfaceKind::Plane);
        if (best_inliers < std::max(minimal, 10)) {
            if (models.empty())
                throw NoModelFound("ransac_multi: no model reached minimal support");
            break;
        }
        // refit on inliers and remove them
        std::vector<Vec3> inset, rest;
        for (const Vec3& p : remaining)
            (distance(best_prim, p) < inlier_dist ? inset : rest).push_back(p);
        FitResult refit;
        try {
            refit = fit_surface(inset, surface_kind(best_prim));
        } catch (const TooFewPoints&) {
            break;
        }
        if (!std::isfinite(refit.rms)) {
            FitResult raw;
            raw.primitive = best_prim;
            raw.rms = rms_distance(best_prim, inset);
            raw.inlier_count = int(inset.size());
            refit = raw;
        }
        refit.inlier_count = int(inset.size());
        models.push_back(refit);
        remaining = std::move(rest);
    }
    if (models.empty()) throw NoModelFound("ransac_multi: nothing fitted");
    return models;
}

CellFit fit_cell(const std::vector<Vec3>& points, double eps1, std::uint64_t seed,
                 double min_extent) {
    CellFit out;
    if (points.size() < 3) return out;  // Degenerate
    if (min_extent > 0) {
        Vec3 lo = points.front(), hi = points.front();
        for (const Vec3& p : points) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        if ((hi - lo).norm() < min_extent) return out;  // Degenerate
    }

    const FitResult plane = fit_surface(points, SurfaceKind::Plane);
    if (plane.rms < eps1) {
        try {
            const FitResult curve = fit_best_curve(points);
            if (curve.rms < eps1) {
                out.kind = CellFit::Kind::Curve;
                out.fit = curve;
                return out;
            }
        } catch (const AllKindsFailed&) {
        }
        out.kind = CellFit::Kind::Surface;
        out.fit = plane;
        return out;
    }

    try {
        const FitResult surf = fit_best_surface(points);
        if (surf.rms < eps1) {
            out.kind = CellFit::Kind::Surface;
            out.fit = surf;
            return out;
        }
    } catch (const AllKindsFailed&) {
    }

    try {
        out.multi = ransac_multi(points, eps1, seed);
        out.kind = CellFit::Kind::Multi;
    } catch (const NoModelFound&) {
        out.kind = CellFit::Kind::Degenerate;
    }
    return out;
}

}  // namespace splitfit
