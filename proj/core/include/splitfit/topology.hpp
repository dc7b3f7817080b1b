#pragma once

#include <string>
#include <vector>

#include "splitfit/brep.hpp"
#include "splitfit/config.hpp"

namespace splitfit {

/// Point on (or near) the intersection locus of two surfaces, with its
/// residual distance to each parent.
struct IntersectionSample {
    Vec3 point = Vec3::Zero();
    double residual_i = 0.0;
    double residual_j = 0.0;
};

/// A curve plus everything the adjacency stages need to reason about it.
struct CurveRecord {
    CurvePrimitive prim;
    double rms = 0.0;
    std::vector<Vec3> points;       // support: intersection samples or cell points
    std::vector<int> parents;       // adjacent surface indices (FE row owners)
};

/// Surfaces i and j are adjacent when their cells share an E_v edge (directly,
/// through one curve/degenerate cell, or by living in the same cell) and their
/// point sets come within eps2 of each other.
BoolMatrix build_surface_adjacency(
    const BoolMatrix& cell_adjacency, const std::vector<int>& surface_cell,
    const std::vector<std::uint8_t>& cell_passthrough,
    const std::vector<std::vector<Vec3>>& surface_points, double eps2);

/// Project seed points onto the intersection locus of two surfaces by
/// alternating orthogonal projection. Seeds that fail to converge below the
/// tolerance are dropped; throws NoIntersection when every seed fails.
std::vector<IntersectionSample> intersect_surfaces(const SurfacePrimitive& fi,
                                                   const SurfacePrimitive& fj,
                                                   const std::vector<Vec3>& seeds,
                                                   double tol = 1e-5,
                                                   int max_rounds = 50);

/// Points of one surface within eps2 of the other and vice versa; the seeds
/// for intersect_surfaces.
std::vector<Vec3> common_points(const SurfacePrimitive& fi,
                                const SurfacePrimitive& fj,
                                const std::vector<Vec3>& pi,
                                const std::vector<Vec3>& pj, double eps2);

struct CurveExtraction {
    std::vector<CurveRecord> curves;
    BoolMatrix FE;  // surfaces x curves
};

/// Intersection-born curves per adjacent surface pair (best curve kind with
/// rms < 10*eps1), merged with cell-fitted curves and deduplicated by sampled
/// Hausdorff distance < eps3/2 (lower rms wins, FE rows unioned).
CurveExtraction extract_curves(const std::vector<SurfacePrimitive>& surfaces,
                               const BoolMatrix& FF,
                               const std::vector<std::vector<Vec3>>& surface_points,
                               const std::vector<CurveRecord>& cell_curves,
                               const Config& cfg);

/// EE(i,j) = curves share a surface in FE and their support points come
/// within eps3.
BoolMatrix build_curve_adjacency(const BoolMatrix& FE,
                                 const std::vector<CurveRecord>& curves,
                                 double eps3);

struct VertexExtraction {
    std::vector<Vec3> vertices;
    BoolMatrix EV;  // curves x vertices
    BoolMatrix FV;  // surfaces x vertices
};

/// Closest-approach intersection of adjacent curve pairs; per pair the
/// candidate closest to both support sets survives, then vertices within
/// eps3/2 merge by averaging. FV follows from FE o EV.
VertexExtraction extract_vertices(const std::vector<CurveRecord>& curves,
                                  const BoolMatrix& EE, const BoolMatrix& FE,
                                  double eps3);

struct AssembledBRep {
    BRepModel model;
    std::vector<std::string> warnings;  // tolerance-level inconsistencies
};

/// Validate and bundle the model. Dimension or index inconsistencies throw
/// InconsistentTopology; tolerance violations (vertex off its curve, broken
/// symmetry) are reported as warnings.
AssembledBRep assemble_brep(std::vector<Vec3> vertices,
                            std::vector<CurvePrimitive> curves,
                            std::vector<SurfacePrimitive> surfaces, BoolMatrix FF,
                            BoolMatrix FE, BoolMatrix EE, BoolMatrix EV,
                            BoolMatrix FV, double eps3);

}  // namespace splitfit
