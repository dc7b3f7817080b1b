#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "splitfit/types.hpp"

namespace splitfit {

/// Integer voxel coordinate, components in [0, r).
struct GridCoord {
    int x = 0, y = 0, z = 0;

    friend bool operator==(const GridCoord&, const GridCoord&) = default;
};

/// Geometry of a cubic grid: where voxel (0,0,0) sits and how big a cell is.
/// Sample points are cell centers.
struct GridGeometry {
    int r = 0;
    Vec3 origin = Vec3::Zero();
    double spacing = 0.0;

    static GridGeometry unit_box(int r) { return {r, Vec3::Zero(), 1.0 / r}; }
};

inline std::int64_t index_of(const GridCoord& c, int r) {
    return c.x + std::int64_t(r) * (c.y + std::int64_t(r) * c.z);
}

inline GridCoord coord_of(std::int64_t idx, int r) {
    GridCoord c;
    c.x = int(idx % r);
    idx /= r;
    c.y = int(idx % r);
    c.z = int(idx / r);
    return c;
}

inline bool in_bounds(const GridCoord& c, int r) {
    return c.x >= 0 && c.x < r && c.y >= 0 && c.y < r && c.z >= 0 && c.z < r;
}

/// Voxel center in world units.
inline Vec3 world_of(const GridCoord& c, const GridGeometry& g) {
    return g.origin + Vec3(c.x + 0.5, c.y + 0.5, c.z + 0.5) * g.spacing;
}

/// Voxel containing a world point; components clamped into the grid.
inline GridCoord coord_at(const Vec3& p, const GridGeometry& g) {
    auto clampi = [&](double v) {
        return std::clamp(int(std::floor(v)), 0, g.r - 1);
    };
    const Vec3 local = (p - g.origin) / g.spacing;
    return {clampi(local.x()), clampi(local.y()), clampi(local.z())};
}

/// In-bounds 6- or 26-connected neighbors, sorted by linear index.
inline std::vector<GridCoord> voxel_neighbors(const GridCoord& c, int connectivity, int r) {
    std::vector<GridCoord> out;
    out.reserve(connectivity);
    // z-major, then y, then x: emission order equals linear-index order
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                if (connectivity == 6 && std::abs(dx) + std::abs(dy) + std::abs(dz) != 1)
                    continue;
                GridCoord n{c.x + dx, c.y + dy, c.z + dz};
                if (in_bounds(n, r)) out.push_back(n);
            }
    return out;
}

/// Dense cubic grid of payloads, x-fastest index order.
template <typename T>
struct VoxelGrid {
    GridGeometry geom;
    std::vector<T> values;

    VoxelGrid() = default;
    explicit VoxelGrid(const GridGeometry& g, const T& fill = T{})
        : geom(g), values(std::size_t(g.r) * g.r * g.r, fill) {}

    int r() const { return geom.r; }
    std::int64_t size() const { return std::int64_t(values.size()); }

    T& at(const GridCoord& c) { return values[index_of(c, geom.r)]; }
    const T& at(const GridCoord& c) const { return values[index_of(c, geom.r)]; }
    T& at(std::int64_t i) { return values[i]; }
    const T& at(std::int64_t i) const { return values[i]; }
};

/// Uniform similarity transform mapping a shape into the unit box [0,1]^3,
/// centered, aspect ratio preserved. Invertible so outputs can be mapped back.
struct Normalization {
    double scale = 1.0;
    Vec3 offset = Vec3::Zero();  // p_norm = (p - offset) * scale + 0.5

    Vec3 to_unit(const Vec3& p) const {
        return (p - offset) * scale + Vec3::Constant(0.5);
    }
    Vec3 from_unit(const Vec3& p) const {
        return (p - Vec3::Constant(0.5)) / scale + offset;
    }

    static Normalization from_points(const std::vector<Vec3>& pts) {
        Normalization n;
        if (pts.empty()) return n;
        Vec3 lo = pts.front(), hi = pts.front();
        for (const Vec3& p : pts) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const double extent = (hi - lo).maxCoeff();
        n.scale = extent > 0 ? 1.0 / extent : 1.0;
        n.offset = 0.5 * (lo + hi);
        return n;
    }
};

}  // namespace splitfit
