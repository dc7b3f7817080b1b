#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "splitfit/primitives.hpp"
#include "splitfit/types.hpp"

namespace splitfit {

struct FitResult {
    std::variant<SurfacePrimitive, CurvePrimitive> primitive;
    double rms = 0.0;
    int inlier_count = 0;
    bool rank_deficient = false;  // e.g. collinear points fed to a plane fit

    bool is_surface() const { return primitive.index() == 0; }
    const SurfacePrimitive& surface() const {
        return std::get<SurfacePrimitive>(primitive);
    }
    const CurvePrimitive& curve() const {
        return std::get<CurvePrimitive>(primitive);
    }
};

struct CellFit {
    enum class Kind { Surface, Curve, Multi, Degenerate };
    Kind kind = Kind::Degenerate;
    FitResult fit;                 // Surface / Curve
    std::vector<FitResult> multi;  // RANSAC fallback members
};

/// Least-squares fit of one surface kind. Plane and sphere are closed form;
/// cylinder, cone and torus refine iteratively from deterministic
/// initializations. A non-convergent refinement reports rms = +infinity so
/// the kind loses any argmin. Throws TooFewPoints below the kind's minimum
/// (plane 3, sphere 4, cylinder 6, cone 6, torus 7).
FitResult fit_surface(const std::vector<Vec3>& points, SurfaceKind kind);

/// Least-squares curve fit (line 2, circle 3, ellipse 5 points minimum).
/// Circle and ellipse fit their support plane first, then the in-plane conic.
FitResult fit_curve(const std::vector<Vec3>& points, CurveKind kind);

/// Argmin over kinds by rms; earlier kinds win ties within 1e-9. Kinds
/// lacking points are skipped; throws AllKindsFailed if nothing fits.
FitResult fit_best_surface(const std::vector<Vec3>& points);
FitResult fit_best_curve(const std::vector<Vec3>& points);

/// Greedy sequential RANSAC over all surface kinds: best model by inlier
/// count at distance < 5*eps1, refit on inliers, remove, repeat (max 10
/// rounds or until < 5% of points remain). Deterministic under `seed`.
std::vector<FitResult> ransac_multi(const std::vector<Vec3>& points, double eps1,
                                    std::uint64_t seed);

/// Sequential per-cell policy: plane first; a fitting plane falls through to
/// curve fitting (curve cells read as planes otherwise); a failing plane
/// tries every surface kind; anything left goes to the RANSAC fallback.
/// Point sets smaller than 3 or with bounding-box diagonal < min_extent
/// come back Degenerate.
CellFit fit_cell(const std::vector<Vec3>& points, double eps1,
                 std::uint64_t seed = 0, double min_extent = 0.0);

/// Root-mean-square point distance to a primitive.
double rms_distance(const SurfacePrimitive& s, const std::vector<Vec3>& points);
double rms_distance(const CurvePrimitive& c, const std::vector<Vec3>& points);

}  // namespace splitfit
