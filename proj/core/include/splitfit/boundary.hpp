#pragma once

#include <functional>
#include <vector>

#include "splitfit/udf.hpp"

namespace splitfit {

/// Overlapping patch tiling: origins every `stride` voxels, clamped so each
/// k^3 patch stays inside the grid; every voxel is covered at least once.
struct PatchSpec {
    int stride = 16;
    int size = 32;
    std::vector<GridCoord> origins;

    static PatchSpec cover(int r, int stride, int size);
};

struct DetectorParams {
    double tau = 0.0;     ///< third-derivative threshold (must be > 0)
    int n_dirs = 8;       ///< tangent directions sampled per voxel
    double d_max = 0.3;   ///< boundary candidates only where d <= d_max
};

/// Centered second and third derivative of the distance field along `dir`
/// at voxel `c`, off-grid samples via trilinear interpolation. Throws
/// OutOfStencil within 2 voxels of a grid face.
std::pair<double, double> directional_derivatives(const UdfGrid& udf,
                                                  const GridCoord& c,
                                                  const Vec3& dir,
                                                  double h);

/// Derivative-discontinuity detector. Probability = clamp(max |f'''| / tau),
/// zeroed where the nearest-site point (x - d*g) agrees with every 6-neighbor
/// to within ~2 voxels: there the field is smooth and any |f'''| response is
/// sampling noise. Voxels whose gradient nearly vanishes sit on the medial
/// set and get p = 1.
/// When mark_unevaluated is set, voxels the stencil cannot reach (2-voxel face
/// margin) and voxels beyond d_max carry -1 instead of 0 so a tiling merge can
/// tell "not boundary" from "not evaluated".
BoundaryGrid detect_analytic(const UdfGrid& udf, const DetectorParams& params,
                             int threads = 0, bool mark_unevaluated = false);

/// Validate an externally produced probability grid (the plug-in seam for a
/// learned predictor).
BoundaryGrid ingest_external(const VoxelGrid<float>& probabilities, int expected_r);

/// Per-patch detector; negative probabilities mean "not evaluated here".
using PatchDetector = std::function<VoxelGrid<float>(const UdfGrid& patch)>;

/// Run the detector per patch and average overlapping evaluations per voxel.
/// Voxels no patch evaluated end up with p = 0.
BoundaryGrid tile_and_merge(const UdfGrid& udf, const PatchSpec& spec,
                            const PatchDetector& detector);

}  // namespace splitfit
