#pragma once

#include <vector>

#include "splitfit/bool_matrix.hpp"
#include "splitfit/primitives.hpp"

namespace splitfit {

/// Boundary representation: geometry lists plus the adjacency matrices that
/// encode the topology. Matrices are indexed (surface, surface), (surface,
/// curve), (curve, curve), (curve, vertex), (surface, vertex).
struct BRepModel {
    std::vector<Vec3> vertices;
    std::vector<CurvePrimitive> curves;
    std::vector<SurfacePrimitive> surfaces;
    BoolMatrix FF, FE, EE, EV, FV;

    int n_vertices() const { return int(vertices.size()); }
    int n_curves() const { return int(curves.size()); }
    int n_surfaces() const { return int(surfaces.size()); }
};

}  // namespace splitfit
