#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "splitfit/bool_matrix.hpp"
#include "splitfit/config.hpp"
#include "splitfit/udf.hpp"

namespace splitfit {

/// Voxel partition into Voronoi cells. Boundary voxels carry NONE.
struct VoronoiCells {
    static constexpr std::int32_t NONE = -1;

    VoxelGrid<std::int32_t> cell_of;
    int n_cells = 0;
    BoolMatrix adjacency;  // E_v
    std::vector<std::vector<std::int64_t>> voxels;  // per-cell linear indices
};

enum class PointSource : std::uint8_t { InputPoint, ProjectedVoxel };

/// Surface points gathered per cell, feeding the fitting stage.
struct CellPoints {
    std::vector<std::vector<Vec3>> points;
    std::vector<PointSource> source;  // one tag per cell
};

/// Gradient-direction majority vote that closes small gaps in the boundary.
/// Single simultaneous pass: reads old flags, writes new ones.
BoundaryGrid fill_holes(const BoundaryGrid& boundary, const UdfGrid& udf,
                        int traversal_steps = 4, double d_max = 0.3);

/// Flood fill of non-boundary voxels over 6-connectivity. Cell ids follow
/// ascending seed voxel index; cells below min_cell_voxels are dropped to NONE.
VoronoiCells grow_regions(const BoundaryGrid& boundary, int min_cell_voxels = 8);

/// Cell adjacency: direct 6-neighbor contact, or two cells visible from one
/// boundary voxel within an L1 ball of radius 2 (the boundary is two voxels
/// thick, so the far side is at most two steps away).
BoolMatrix cell_adjacency(const VoronoiCells& cells, const BoundaryGrid& boundary);

/// Attach surface points to cells. With input points, each point joins the
/// cell of its containing voxel (boundary voxels fall back to the nearest
/// non-boundary voxel within 2 steps). Without, near-surface voxels project
/// onto the shape along -g.
CellPoints assign_points(const VoronoiCells& cells, const UdfGrid& udf,
                         const std::optional<std::vector<Vec3>>& input_points);

}  // namespace splitfit
