#include "splitfit/cells.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "splitfit/types.hpp"

namespace splitfit {

BoundaryGrid fill_holes(const BoundaryGrid& boundary, const UdfGrid& udf,
                        int traversal_steps, double d_max) {
    if (boundary.r() != udf.r())
        throw ResolutionMismatch("fill_holes: grid resolutions differ");
    const GridGeometry& geom = udf.geom;
    const double h = geom.spacing;
    BoundaryGrid out = boundary;
    for (std::int64_t i = 0; i < udf.size(); ++i) {
        if (boundary.flag(i)) continue;
        const UdfVoxel& v = udf.at(i);
        if (v.d > d_max) continue;
        const double gn = v.g.norm();
        if (gn < 1e-12) continue;
        const Vec3 dir = v.g / gn;
        const Vec3 x = world_of(coord_of(i, geom.r), geom);
        int hits = 0, total = 0;
        for (int sgn : {+1, -1}) {
            for (int s = 1; s <= traversal_steps; ++s) {
                const Vec3 q = x + sgn * s * h * dir;
                const GridCoord c = coord_at(q, geom);
                const Vec3 back = world_of(c, geom);
                if ((q - back).cwiseAbs().maxCoeff() > 0.75 * h) break;  // left the grid
                ++total;
                if (boundary.flag(c)) ++hits;
            }
        }
        if (total > 0 && 2 * hits >= total) out.p.at(i) = 1.0f;
    }
    return out;
}

VoronoiCells grow_regions(const BoundaryGrid& boundary, int min_cell_voxels) {
    const int r = boundary.r();
    VoronoiCells cells;
    cells.cell_of = VoxelGrid<std::int32_t>(boundary.p.geom, VoronoiCells::NONE);
    std::vector<std::vector<std::int64_t>> raw;

    for (std::int64_t seed = 0; seed < boundary.p.size(); ++seed) {
        if (boundary.flag(seed) || cells.cell_of.at(seed) != VoronoiCells::NONE)
            continue;
        const std::int32_t id = std::int32_t(raw.size());
        raw.emplace_back();
        std::deque<std::int64_t> frontier{seed};
        cells.cell_of.at(seed) = id;
        while (!frontier.empty()) {
            const std::int64_t cur = frontier.front();
            frontier.pop_front();
            raw[id].push_back(cur);
            for (const GridCoord& n : voxel_neighbors(coord_of(cur, r), 6, r)) {
                const std::int64_t ni = index_of(n, r);
                if (boundary.flag(ni) || cells.cell_of.at(ni) != VoronoiCells::NONE)
                    continue;
                cells.cell_of.at(ni) = id;
                frontier.push_back(ni);
            }
        }
    }
    if (raw.empty()) throw NoCells("grow_regions: every voxel is boundary");

    // drop speckle cells, renumber the rest densely (order preserved)
    std::vector<std::int32_t> remap(raw.size(), VoronoiCells::NONE);
    for (std::size_t id = 0; id < raw.size(); ++id) {
        if (int(raw[id].size()) >= min_cell_voxels) {
            remap[id] = cells.n_cells++;
            cells.voxels.push_back(std::move(raw[id]));
        }
    }
    if (cells.n_cells == 0) throw NoCells("grow_regions: only speckle cells");
    for (std::int64_t i = 0; i < cells.cell_of.size(); ++i) {
        const std::int32_t id = cells.cell_of.at(i);
        cells.cell_of.at(i) = id == VoronoiCells::NONE ? VoronoiCells::NONE : remap[id];
    }
    // cell ids already follow ascending seed index by construction
    cells.adjacency = BoolMatrix(cells.n_cells, cells.n_cells);
    return cells;
}

BoolMatrix cell_adjacency(const VoronoiCells& cells, const BoundaryGrid& boundary) {
    const int r = cells.cell_of.r();
    BoolMatrix adj(cells.n_cells, cells.n_cells);

    // direct contact
    for (std::int64_t i = 0; i < cells.cell_of.size(); ++i) {
        const std::int32_t a = cells.cell_of.at(i);
        if (a == VoronoiCells::NONE) continue;
        for (const GridCoord& n : voxel_neighbors(coord_of(i, r), 6, r)) {
            const std::int32_t b = cells.cell_of.at(n);
            if (b != VoronoiCells::NONE && b != a) adj.set_sym(a, b);
        }
    }

    // bridged through the boundary: all cells visible within an L1 ball of 2
    for (std::int64_t i = 0; i < boundary.p.size(); ++i) {
        if (!boundary.flag(i)) continue;
        const GridCoord c = coord_of(i, r);
        std::vector<std::int32_t> seen;
        for (int dz = -2; dz <= 2; ++dz)
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    if (std::abs(dx) + std::abs(dy) + std::abs(dz) > 2) continue;
                    const GridCoord n{c.x + dx, c.y + dy, c.z + dz};
                    if (!in_bounds(n, r)) continue;
                    const std::int32_t id = cells.cell_of.at(n);
                    if (id != VoronoiCells::NONE) seen.push_back(id);
                }
        for (std::size_t a = 0; a < seen.size(); ++a)
            for (std::size_t b = a + 1; b < seen.size(); ++b)
                if (seen[a] != seen[b]) adj.set_sym(seen[a], seen[b]);
    }
    return adj;
}

CellPoints assign_points(const VoronoiCells& cells, const UdfGrid& udf,
                         const std::optional<std::vector<Vec3>>& input_points) {
    const int r = cells.cell_of.r();
    const GridGeometry& geom = udf.geom;
    CellPoints out;
    out.points.resize(cells.n_cells);
    out.source.assign(cells.n_cells, PointSource::ProjectedVoxel);

    if (input_points && !input_points->empty()) {
        std::fill(out.source.begin(), out.source.end(), PointSource::InputPoint);
        for (const Vec3& p : *input_points) {
            const GridCoord c = coord_at(p, geom);
            std::int32_t id = cells.cell_of.at(c);
            if (id == VoronoiCells::NONE) {
                // nearest non-boundary voxel within 2 steps
                double best = std::numeric_limits<double>::infinity();
                for (int dz = -2; dz <= 2; ++dz)
                    for (int dy = -2; dy <= 2; ++dy)
                        for (int dx = -2; dx <= 2; ++dx) {
                            const GridCoord n{c.x + dx, c.y + dy, c.z + dz};
                            if (!in_bounds(n, r)) continue;
                            const std::int32_t nid = cells.cell_of.at(n);
                            if (nid == VoronoiCells::NONE) continue;
                            const double d2 = (world_of(n, geom) - p).squaredNorm();
                            if (d2 < best) {
                                best = d2;
                                id = nid;
                            }
                        }
            }
            if (id != VoronoiCells::NONE) out.points[id].push_back(p);
        }
        return out;
    }

    for (std::int32_t id = 0; id < cells.n_cells; ++id) {
        for (std::int64_t i : cells.voxels[id]) {
            const UdfVoxel& v = udf.at(i);
            if (v.d > 2.0 * geom.spacing) continue;
            const Vec3 x = world_of(coord_of(i, r), geom);
            out.points[id].push_back(x - v.d * v.g);
        }
    }
    return out;
}

}  // namespace splitfit
