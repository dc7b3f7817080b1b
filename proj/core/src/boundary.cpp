#include "splitfit/boundary.hpp"

#include <cmath>

#include "splitfit/parallel.hpp"
#include "splitfit/primitives.hpp"
#include "splitfit/types.hpp"

namespace splitfit {

PatchSpec PatchSpec::cover(int r, int stride, int size) {
    PatchSpec spec;
    spec.stride = stride;
    spec.size = std::min(size, r);
    std::vector<int> starts;
    for (int o = 0;; o += stride) {
        const int clamped = std::min(o, r - spec.size);
        if (starts.empty() || starts.back() != clamped) starts.push_back(clamped);
        if (o >= r - spec.size) break;
    }
    for (int z : starts)
        for (int y : starts)
            for (int x : starts) spec.origins.push_back({x, y, z});
    return spec;
}

std::pair<double, double> directional_derivatives(const UdfGrid& udf,
                                                  const GridCoord& c,
                                                  const Vec3& dir, double h) {
    const int r = udf.r();
    const int m = std::min({c.x, c.y, c.z, r - 1 - c.x, r - 1 - c.y, r - 1 - c.z});
    if (m < 2) throw OutOfStencil("directional_derivatives: voxel too close to a face");
    const Vec3 x = world_of(c, udf.geom);
    const double fm2 = sample_distance(udf, x - 2 * h * dir);
    const double fm1 = sample_distance(udf, x - h * dir);
    const double f0 = udf.at(c).d;
    const double fp1 = sample_distance(udf, x + h * dir);
    const double fp2 = sample_distance(udf, x + 2 * h * dir);
    const double f2 = (fp1 - 2 * f0 + fm1) / (h * h);
    const double f3 = (fp2 - 2 * fp1 + 2 * fm1 - fm2) / (2 * h * h * h);
    return {f2, f3};
}

namespace {

/// One-sided third difference marching from the voxel along +dir with a half
/// step. Along the gradient the exact field is linear up to the next crease,
/// so this never fires on the shape's own d = 0 ridge behind the voxel while
/// still catching the cell boundary ahead.
double forward_third_difference(const UdfGrid& udf, const Vec3& x,
                                const Vec3& dir, double h) {
    const double s = 0.5 * h;
    const double f0 = sample_distance(udf, x);
    const double f1 = sample_distance(udf, x + s * dir);
    const double f2 = sample_distance(udf, x + 2 * s * dir);
    const double f3 = sample_distance(udf, x + 3 * s * dir);
    return (-f0 + 3 * f1 - 3 * f2 + f3) / (s * s * s);
}

/// Between two adjacent voxels assigned to the same smooth site, the nearest
/// surface point (reconstructed as x - d*g from the stored gradient) moves by
/// at most about one voxel. Across a Voronoi boundary it jumps to a different
/// site. Requiring a jump of a few voxels confines boundary flags to the
/// faces where the assignment actually changes and rejects the |f'''| noise
/// floor of sampled distance fields (interpolation kinks scale like 1/h and
/// would otherwise swamp curvature-jump boundaries).
const double kSiteJumpFactor = 2.0;

bool nearest_site_jump(const UdfGrid& udf, const GridCoord& c, double h,
                       double factor) {
    const UdfVoxel& v = udf.at(c);
    const double gn = v.g.norm();
    if (gn < 1e-6) return true;  // medial voxel: boundary-adjacent by construction
    const Vec3 site = world_of(c, udf.geom) - v.d * (v.g / gn);
    const int r = udf.r();
    const int off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                           {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (const auto& o : off) {
        const GridCoord n{c.x + o[0], c.y + o[1], c.z + o[2]};
        if (n.x < 0 || n.y < 0 || n.z < 0 || n.x >= r || n.y >= r || n.z >= r)
            continue;
        const UdfVoxel& w = udf.at(n);
        const double wn = w.g.norm();
        if (wn < 1e-6) continue;
        const Vec3 wsite = world_of(n, udf.geom) - w.d * (w.g / wn);
        if ((site - wsite).norm() > factor * h) return true;
    }
    return false;
}

}  // namespace

BoundaryGrid detect_analytic(const UdfGrid& udf, const DetectorParams& params,
                             int threads, bool mark_unevaluated) {
    const int r = udf.r();
    if (r < 8) throw GridTooSmall("detect_analytic: resolution < 8");
    if (params.tau <= 0.0) throw ValueOutOfRange("detect_analytic: tau must be > 0");
    const double h = udf.geom.spacing;
    const float skipped = mark_unevaluated ? -1.0f : 0.0f;

    BoundaryGrid out{VoxelGrid<float>(udf.geom, 0.0f)};
    parallel_for(udf.size(), threads, [&](std::int64_t i) {
        const GridCoord c = coord_of(i, r);
        const int m = std::min({c.x, c.y, c.z, r - 1 - c.x, r - 1 - c.y, r - 1 - c.z});
        if (m < 2) {
            out.p.at(i) = skipped;
            return;
        }
        const UdfVoxel& v = udf.at(i);
        if (v.d > params.d_max) {
            out.p.at(i) = skipped;
            return;
        }
        const double gn = v.g.norm();
        if (gn < 1e-6) {
            out.p.at(i) = 1.0f;
            return;
        }
        if (!nearest_site_jump(udf, c, h, kSiteJumpFactor)) {
            out.p.at(i) = 0.0f;
            return;
        }
        const Vec3 g = v.g / gn;
        const auto [u, w] = any_orthonormal(g);
        double max_f3 = 0.0;
        for (int k = 0; k < params.n_dirs; ++k) {
            const double ang = M_PI * k / params.n_dirs;
            const Vec3 dir = std::cos(ang) * u + std::sin(ang) * w;
            const auto [f2, f3] = directional_derivatives(udf, c, dir, h);
            (void)f2;
            max_f3 = std::max(max_f3, std::abs(f3));
        }
        const Vec3 x = world_of(c, udf.geom);
        max_f3 = std::max(max_f3, std::abs(forward_third_difference(udf, x, g, h)));
        out.p.at(i) = float(std::clamp(max_f3 / params.tau, 0.0, 1.0));
    });
    return out;
}

BoundaryGrid ingest_external(const VoxelGrid<float>& probabilities, int expected_r) {
    if (probabilities.r() != expected_r)
        throw ResolutionMismatch("ingest_external: resolution mismatch");
    for (const float p : probabilities.values)
        if (!(p >= 0.0f && p <= 1.0f))
            throw ValueOutOfRange("ingest_external: probability outside [0,1]");
    return BoundaryGrid{probabilities};
}

BoundaryGrid tile_and_merge(const UdfGrid& udf, const PatchSpec& spec,
                            const PatchDetector& detector) {
    const int r = udf.r();
    const int k = spec.size;
    std::vector<float> sum(udf.size(), 0.0f);
    std::vector<std::uint16_t> count(udf.size(), 0);

    for (const GridCoord& o : spec.origins) {
        UdfGrid patch(GridGeometry{k, udf.geom.origin + Vec3(o.x, o.y, o.z) * udf.geom.spacing,
                                   udf.geom.spacing});
        for (int z = 0; z < k; ++z)
            for (int y = 0; y < k; ++y)
                for (int x = 0; x < k; ++x)
                    patch.at(GridCoord{x, y, z}) =
                        udf.at(GridCoord{o.x + x, o.y + y, o.z + z});
        const VoxelGrid<float> probs = detector(patch);
        for (int z = 0; z < k; ++z)
            for (int y = 0; y < k; ++y)
                for (int x = 0; x < k; ++x) {
                    const float p = probs.at(GridCoord{x, y, z});
                    if (p < 0.0f) continue;  // not evaluated in this patch
                    const std::int64_t gi =
                        index_of(GridCoord{o.x + x, o.y + y, o.z + z}, r);
                    sum[gi] += p;
                    count[gi] += 1;
                }
    }
    BoundaryGrid out{VoxelGrid<float>(udf.geom, 0.0f)};
    for (std::int64_t i = 0; i < out.p.size(); ++i)
        if (count[i] > 0) out.p.at(i) = sum[i] / count[i];
    return out;
}

}  // namespace splitfit
