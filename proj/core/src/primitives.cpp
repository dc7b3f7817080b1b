#include "splitfit/primitives.hpp"

#include <cmath>

namespace splitfit {

SurfaceKind surface_kind(const SurfacePrimitive& s) {
    return SurfaceKind(s.index());
}

CurveKind curve_kind(const CurvePrimitive& c) {
    return CurveKind(c.index());
}

std::string kind_name(SurfaceKind k) {
    switch (k) {
        case SurfaceKind::Plane: return "plane";
        case SurfaceKind::Sphere: return "sphere";
        case SurfaceKind::Cylinder: return "cylinder";
        case SurfaceKind::Cone: return "cone";
        case SurfaceKind::Torus: return "torus";
    }
    return "?";
}

std::string kind_name(CurveKind k) {
    switch (k) {
        case CurveKind::Line: return "line";
        case CurveKind::Circle: return "circle";
        case CurveKind::Ellipse: return "ellipse";
    }
    return "?";
}

std::pair<Vec3, Vec3> any_orthonormal(const Vec3& unit) {
    // pick the coordinate axis least aligned with `unit`
    Vec3 ref = Vec3::UnitX();
    const Vec3 a = unit.cwiseAbs();
    if (a.y() <= a.x() && a.y() <= a.z())
        ref = Vec3::UnitY();
    else if (a.z() <= a.x() && a.z() <= a.y())
        ref = Vec3::UnitZ();
    Vec3 u = unit.cross(ref).normalized();
    Vec3 v = unit.cross(u);
    return {u, v};
}

// --- distances and projections -------------------------------------------

namespace {

// radial/axial decomposition relative to an axis through `base`
struct AxisFrame {
    double h;     // signed height along axis
    double rho;   // radial distance from axis
    Vec3 radial;  // unit radial direction (arbitrary when rho == 0)
};

AxisFrame axis_frame(const Vec3& base, const Vec3& axis, const Vec3& p) {
    const Vec3 v = p - base;
    AxisFrame f;
    f.h = v.dot(axis);
    const Vec3 rad = v - f.h * axis;
    f.rho = rad.norm();
    f.radial = f.rho > 1e-300 ? Vec3(rad / f.rho) : any_orthonormal(axis).first;
    return f;
}

}  // namespace

double distance(const SurfacePrimitive& s, const Vec3& p) {
    return std::visit(
        [&](const auto& prim) -> double {
            using T = std::decay_t<decltype(prim)>;
            if constexpr (std::is_same_v<T, Plane>) {
                return std::abs(prim.normal.dot(p) - prim.offset);
            } else if constexpr (std::is_same_v<T, Sphere>) {
                return std::abs((p - prim.center).norm() - prim.radius);
            } else if constexpr (std::is_same_v<T, Cylinder>) {
                const AxisFrame f = axis_frame(prim.point, prim.axis, p);
                return std::abs(f.rho - prim.radius);
            } else if constexpr (std::is_same_v<T, Cone>) {
                const AxisFrame f = axis_frame(prim.apex, prim.axis, p);
                const double st = std::sin(prim.half_angle);
                const double ct = std::cos(prim.half_angle);
                const double t = f.rho * st + f.h * ct;  // slant coordinate
                if (t <= 0.0) return (p - prim.apex).norm();
                return std::abs(f.rho * ct - f.h * st);
            } else {  // Torus
                const AxisFrame f = axis_frame(prim.center, prim.axis, p);
                const double dr = f.rho - prim.major_radius;
                return std::abs(std::sqrt(dr * dr + f.h * f.h) - prim.minor_radius);
            }
        },
        s);
}

Vec3 project(const SurfacePrimitive& s, const Vec3& p) {
    return std::visit(
        [&](const auto& prim) -> Vec3 {
            using T = std::decay_t<decltype(prim)>;
            if constexpr (std::is_same_v<T, Plane>) {
                return p - (prim.normal.dot(p) - prim.offset) * prim.normal;
            } else if constexpr (std::is_same_v<T, Sphere>) {
                const Vec3 v = p - prim.center;
                const double n = v.norm();
                if (n < 1e-300) return prim.center + prim.radius * Vec3::UnitZ();
                return prim.center + prim.radius / n * v;
            } else if constexpr (std::is_same_v<T, Cylinder>) {
                const AxisFrame f = axis_frame(prim.point, prim.axis, p);
                return prim.point + f.h * prim.axis + prim.radius * f.radial;
            } else if constexpr (std::is_same_v<T, Cone>) {
                const AxisFrame f = axis_frame(prim.apex, prim.axis, p);
                const double st = std::sin(prim.half_angle);
                const double ct = std::cos(prim.half_angle);
                const double t = f.rho * st + f.h * ct;
                if (t <= 0.0) return prim.apex;
                return prim.apex + t * ct * prim.axis + t * st * f.radial;
            } else {  // Torus
                const AxisFrame f = axis_frame(prim.center, prim.axis, p);
                const Vec3 tube_center =
                    prim.center + prim.major_radius * f.radial;
                const Vec3 v = p - tube_center;
                const double n = v.norm();
                const Vec3 dir = n > 1e-300 ? Vec3(v / n) : prim.axis;
                return tube_center + prim.minor_radius * dir;
            }
        },
        s);
}

double point_ellipse_distance_2d(double a, double b, double y0, double y1,
                                 double* cx, double* cy) {
    // work in the first quadrant, restore signs at the end
    const double sx = y0 < 0 ? -1.0 : 1.0;
    const double sy = y1 < 0 ? -1.0 : 1.0;
    y0 = std::abs(y0);
    y1 = std::abs(y1);

    double x0, x1, dist;
    const double eps = 1e-14;
    if (y1 > eps) {
        if (y0 > eps) {
            // bisect F(t) = (a y0 / (t + a^2))^2 + (b y1 / (t + b^2))^2 - 1
            const double t0 = -b * b + b * y1;
            double lo = t0, hi = std::max(a * y0, b * y1) * 2 + a * a;
            auto F = [&](double t) {
                const double r0 = a * y0 / (t + a * a);
                const double r1 = b * y1 / (t + b * b);
                return r0 * r0 + r1 * r1 - 1.0;
            };
            while (F(hi) > 0) hi = 2 * hi + a * a;
            for (int i = 0; i < 80 && hi - lo > 1e-13 * (1 + std::abs(hi)); ++i) {
                const double mid = 0.5 * (lo + hi);
                (F(mid) > 0 ? lo : hi) = mid;
            }
            const double t = 0.5 * (lo + hi);
            x0 = a * a * y0 / (t + a * a);
            x1 = b * b * y1 / (t + b * b);
            dist = std::hypot(x0 - y0, x1 - y1);
        } else {
            x0 = 0.0;
            x1 = b;
            dist = std::abs(y1 - b);
        }
    } else {
        const double numer = a * a - b * b;
        if (a > b && y0 < numer / a) {
            // nearest point is off-axis
            x0 = a * a * y0 / numer;
            const double f = x0 / a;
            x1 = b * std::sqrt(std::max(0.0, 1.0 - f * f));
            dist = std::hypot(x0 - y0, x1 - y1);
        } else {
            x0 = a;
            x1 = 0.0;
            dist = std::abs(y0 - a);
        }
    }
    if (cx) *cx = sx * x0;
    if (cy) *cy = sy * x1;
    return dist;
}

double distance(const CurvePrimitive& c, const Vec3& p) {
    return std::visit(
        [&](const auto& prim) -> double {
            using T = std::decay_t<decltype(prim)>;
            if constexpr (std::is_same_v<T, Line>) {
                const Vec3 v = p - prim.point;
                return (v - v.dot(prim.direction) * prim.direction).norm();
            } else if constexpr (std::is_same_v<T, Circle>) {
                const AxisFrame f = axis_frame(prim.center, prim.normal, p);
                const double dr = f.rho - prim.radius;
                return std::sqrt(dr * dr + f.h * f.h);
            } else {  // Ellipse
                const Vec3 v = p - prim.center;
                const double h = v.dot(prim.normal);
                const Vec3 minor = prim.normal.cross(prim.major_axis);
                const double u = v.dot(prim.major_axis);
                const double w = v.dot(minor);
                const double d2 =
                    point_ellipse_distance_2d(prim.a, prim.b, u, w);
                return std::sqrt(d2 * d2 + h * h);
            }
        },
        c);
}

Vec3 project(const CurvePrimitive& c, const Vec3& p) {
    return std::visit(
        [&](const auto& prim) -> Vec3 {
            using T = std::decay_t<decltype(prim)>;
            if constexpr (std::is_same_v<T, Line>) {
                const Vec3 v = p - prim.point;
                return prim.point + v.dot(prim.direction) * prim.direction;
            } else if constexpr (std::is_same_v<T, Circle>) {
                const AxisFrame f = axis_frame(prim.center, prim.normal, p);
                return prim.center + prim.radius * f.radial;
            } else {  // Ellipse
                const Vec3 v = p - prim.center;
                const Vec3 minor = prim.normal.cross(prim.major_axis);
                const double u = v.dot(prim.major_axis);
                const double w = v.dot(minor);
                double cu, cw;
                point_ellipse_distance_2d(prim.a, prim.b, u, w, &cu, &cw);
                return prim.center + cu * prim.major_axis + cw * minor;
            }
        },
        c);
}

Vec3 point_at(const CurvePrimitive& c, double t) {
    return std::visit(
        [&](const auto& prim) -> Vec3 {
            using T = std::decay_t<decltype(prim)>;
            if constexpr (std::is_same_v<T, Line>) {
                return prim.point + t * prim.direction;
            } else if constexpr (std::is_same_v<T, Circle>) {
                const auto [u, v] = any_orthonormal(prim.normal);
                return prim.center +
                       prim.radius * (std::cos(t) * u + std::sin(t) * v);
            } else {  // Ellipse
                const Vec3 minor = prim.normal.cross(prim.major_axis);
                return prim.center + prim.a * std::cos(t) * prim.major_axis +
                       prim.b * std::sin(t) * minor;
            }
        },
        c);
}

Vec3 canonical_direction(const Vec3& d) {
    const double tol = 1e-12;
    bool flip = false;
    if (d.z() < -tol)
        flip = true;
    else if (std::abs(d.z()) <= tol) {
        if (d.y() < -tol)
            flip = true;
        else if (std::abs(d.y()) <= tol && d.x() < 0)
            flip = true;
    }
    return flip ? Vec3(-d) : d;
}

void canonicalize(SurfacePrimitive& s) {
    std::visit(
        [](auto& prim) {
            using T = std::decay_t<decltype(prim)>;
            if constexpr (std::is_same_v<T, Plane>) {
                const Vec3 n = canonical_direction(prim.normal);
                if (n.dot(prim.normal) < 0) prim.offset = -prim.offset;
                prim.normal = n;
            } else if constexpr (std::is_same_v<T, Cylinder> ||
                                 std::is_same_v<T, Torus>) {
                prim.axis = canonical_direction(prim.axis);
            }
            // Sphere has no direction; the cone axis is not sign-symmetric.
        },
        s);
}

void canonicalize(CurvePrimitive& c) {
    std::visit(
        [](auto& prim) {
            using T = std::decay_t<decltype(prim)>;
            if constexpr (std::is_same_v<T, Line>) {
                prim.direction = canonical_direction(prim.direction);
            } else if constexpr (std::is_same_v<T, Circle>) {
                prim.normal = canonical_direction(prim.normal);
            } else {  // Ellipse
                prim.normal = canonical_direction(prim.normal);
                prim.major_axis = canonical_direction(prim.major_axis);
                // keep the frame right-handed up to the b-axis sign; the
                // ellipse itself is symmetric under minor-axis flips
            }
        },
        c);
}

}  // namespace splitfit
