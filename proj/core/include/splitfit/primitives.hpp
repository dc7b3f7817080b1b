#pragma once

#include <string>
#include <variant>

#include "splitfit/types.hpp"

namespace splitfit {

// --- surface kinds -------------------------------------------------------

struct Plane {
    Vec3 normal = Vec3::UnitZ();  // unit; normal . x = offset
    double offset = 0.0;
};

struct Sphere {
    Vec3 center = Vec3::Zero();
    double radius = 1.0;
};

struct Cylinder {
    Vec3 point = Vec3::Zero();  // any point on the axis
    Vec3 axis = Vec3::UnitZ();  // unit
    double radius = 1.0;
};

struct Cone {
    Vec3 apex = Vec3::Zero();
    Vec3 axis = Vec3::UnitZ();  // unit, points from apex into the cone
    double half_angle = 0.5;    // in (0, pi/2)
};

struct Torus {
    Vec3 center = Vec3::Zero();
    Vec3 axis = Vec3::UnitZ();  // unit
    double major_radius = 1.0;
    double minor_radius = 0.25;
};

using SurfacePrimitive = std::variant<Plane, Sphere, Cylinder, Cone, Torus>;

// --- curve kinds ---------------------------------------------------------

struct Line {
    Vec3 point = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();  // unit
};

struct Circle {
    Vec3 center = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();  // unit plane normal
    double radius = 1.0;
};

struct Ellipse {
    Vec3 center = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();      // unit plane normal
    Vec3 major_axis = Vec3::UnitX();  // unit, orthogonal to normal
    double a = 1.0;                   // semi-major, a >= b
    double b = 0.5;                   // semi-minor
};

using CurvePrimitive = std::variant<Line, Circle, Ellipse>;

enum class SurfaceKind { Plane, Sphere, Cylinder, Cone, Torus };
enum class CurveKind { Line, Circle, Ellipse };

SurfaceKind surface_kind(const SurfacePrimitive& s);
CurveKind curve_kind(const CurvePrimitive& c);
std::string kind_name(SurfaceKind k);
std::string kind_name(CurveKind k);

// --- geometry queries ----------------------------------------------------

/// Unsigned distance from a point to the surface.
double distance(const SurfacePrimitive& s, const Vec3& p);
/// Closest point on the surface.
Vec3 project(const SurfacePrimitive& s, const Vec3& p);

double distance(const CurvePrimitive& c, const Vec3& p);
Vec3 project(const CurvePrimitive& c, const Vec3& p);

/// Point on the curve at parameter t (line: arclength; circle/ellipse: angle).
Vec3 point_at(const CurvePrimitive& c, double t);

/// Deterministic orthonormal pair spanning the plane orthogonal to a unit vector.
std::pair<Vec3, Vec3> any_orthonormal(const Vec3& unit);

/// Flip sign-symmetric directions to the canonical half space
/// (non-negative z, ties broken by y then x). The cone axis is left alone:
/// flipping it changes the shape.
Vec3 canonical_direction(const Vec3& d);
void canonicalize(SurfacePrimitive& s);
void canonicalize(CurvePrimitive& c);

/// Distance from a 2D point to an axis-aligned ellipse x^2/a^2 + y^2/b^2 = 1,
/// a >= b > 0. Robust for points anywhere including the center.
double point_ellipse_distance_2d(double a, double b, double y0, double y1,
                                 double* cx = nullptr, double* cy = nullptr);

}  // namespace splitfit
