#include "splitfit/gt_voronoi.hpp"

#include <algorithm>
#include <map>

namespace splitfit {

BoundaryGrid boundary_from_labels(const LabelGrid& labels) {
    const int r = labels.r();
    BoundaryGrid out{VoxelGrid<float>(labels.geom, 0.0f)};
    for (std::int64_t i = 0; i < labels.size(); ++i) {
        const GridCoord c = coord_of(i, r);
        const std::int32_t own = labels.at(i);
        for (const GridCoord& n : voxel_neighbors(c, 6, r)) {
            if (labels.at(n) != own) {
                out.p.at(i) = 1.0f;
                break;
            }
        }
    }
    return out;
}

VoronoiCells cells_from_labels(const LabelGrid& labels) {
    const int r = labels.r();
    // dense cell ids in ascending label order
    std::map<std::int32_t, std::int32_t> id_of;
    for (std::int64_t i = 0; i < labels.size(); ++i) id_of.emplace(labels.at(i), 0);
    std::int32_t next = 0;
    for (auto& [label, id] : id_of) id = next++;

    VoronoiCells cells;
    cells.n_cells = next;
    cells.cell_of = VoxelGrid<std::int32_t>(labels.geom, VoronoiCells::NONE);
    cells.voxels.resize(next);
    cells.adjacency = BoolMatrix(next, next);
    for (std::int64_t i = 0; i < labels.size(); ++i) {
        const std::int32_t id = id_of.at(labels.at(i));
        cells.cell_of.at(i) = id;
        cells.voxels[id].push_back(i);
    }
    for (std::int64_t i = 0; i < labels.size(); ++i) {
        const GridCoord c = coord_of(i, r);
        const std::int32_t a = cells.cell_of.at(i);
        for (const GridCoord& n : voxel_neighbors(c, 6, r)) {
            const std::int32_t b = cells.cell_of.at(n);
            if (a != b) cells.adjacency.set_sym(a, b);
        }
    }
    return cells;
}

}  // namespace splitfit
