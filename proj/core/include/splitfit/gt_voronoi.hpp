#pragma once

#include "splitfit/cells.hpp"
#include "splitfit/udf.hpp"

namespace splitfit {

/// Ground-truth boundary: a voxel is boundary iff some 6-neighbor carries a
/// different nearest-primitive label (both sides get marked).
BoundaryGrid boundary_from_labels(const LabelGrid& labels);

/// Ground-truth cells: one per distinct label present, adjacency from
/// 6-connected label pairs. Every voxel belongs to a cell.
VoronoiCells cells_from_labels(const LabelGrid& labels);

}  // namespace splitfit
