#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "splitfit/config.hpp"
#include "splitfit/grid.hpp"

namespace splitfit {

/// Per-voxel distance + gradient record.
struct UdfVoxel {
    double d = 0.0;
    Vec3 g = Vec3::Zero();
};

using UdfGrid = VoxelGrid<UdfVoxel>;
using LabelGrid = VoxelGrid<std::int32_t>;

/// Voronoi-boundary probability field; the binary flag is p >= 0.5.
struct BoundaryGrid {
    VoxelGrid<float> p;

    int r() const { return p.r(); }
    bool flag(std::int64_t i) const { return p.at(i) >= 0.5f; }
    bool flag(const GridCoord& c) const { return p.at(c) >= 0.5f; }
};

/// Exact nearest-neighbor index over one or more point sets. Ties are broken
/// by lowest set index, then lowest point index, independent of query order.
class PointIndex {
  public:
    struct Hit {
        double d2 = 0.0;
        int set = 0;
        int index = 0;
        Vec3 point = Vec3::Zero();
    };

    explicit PointIndex(const std::vector<std::vector<Vec3>>& sets);
    explicit PointIndex(const std::vector<Vec3>& points);

    /// Exact nearest neighbor. `hint` (a point known to be in the index)
    /// seeds the search with an upper bound; it never changes the result,
    /// only the pruning.
    Hit nearest(const Vec3& q, const Vec3* hint = nullptr) const;
    std::size_t point_count() const { return pts_.size(); }

  private:
    struct Entry {
        Vec3 p;
        int set;
        int index;
    };
    std::vector<Entry> pts_;
    std::vector<std::vector<std::uint32_t>> buckets_;
    std::vector<Vec3> bucket_lo_, bucket_hi_;  // AABB of each bucket's points
    Vec3 lo_ = Vec3::Zero();
    double edge_ = 1.0;  // bucket edge length
    int nb_ = 1;         // buckets per axis

    void build();
};

/// Exact unsigned distance field to a point set, gradients analytic from the
/// nearest neighbor (zero where d == 0).
UdfGrid udf_from_points(const std::vector<Vec3>& points, const Config& cfg);

/// Distance field plus nearest-primitive labels from per-primitive sample sets.
std::pair<UdfGrid, LabelGrid> udf_from_primitive_samples(
    const std::vector<std::vector<Vec3>>& sample_sets, const Config& cfg);

/// Finite-difference gradient: central differences inside, one-sided at faces.
VoxelGrid<Vec3> finite_gradient(const VoxelGrid<double>& field);

/// Trilinear interpolation of the distance channel at a world point,
/// clamped to the voxel-center lattice.
double sample_distance(const UdfGrid& udf, const Vec3& world);

}  // namespace splitfit
