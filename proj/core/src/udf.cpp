#include "splitfit/udf.hpp"

#include <cmath>
#include <limits>

#include "splitfit/parallel.hpp"
#include "splitfit/types.hpp"

namespace splitfit {

PointIndex::PointIndex(const std::vector<std::vector<Vec3>>& sets) {
    std::size_t total = 0;
    for (const auto& s : sets) total += s.size();
    pts_.reserve(total);
    for (int si = 0; si < int(sets.size()); ++si)
        for (int pi = 0; pi < int(sets[si].size()); ++pi)
            pts_.push_back({sets[si][pi], si, pi});
    build();
}

PointIndex::PointIndex(const std::vector<Vec3>& points) {
    pts_.reserve(points.size());
    for (int pi = 0; pi < int(points.size()); ++pi)
        pts_.push_back({points[pi], 0, pi});
    build();
}

void PointIndex::build() {
    if (pts_.empty()) throw EmptyInput("PointIndex: no points");
    Vec3 hi = pts_.front().p;
    lo_ = hi;
    for (const auto& e : pts_) {
        lo_ = lo_.cwiseMin(e.p);
        hi = hi.cwiseMax(e.p);
    }
    const double extent = std::max((hi - lo_).maxCoeff(), 1e-9);
    nb_ = std::clamp(int(std::cbrt(double(pts_.size()) / 32.0)), 1, 128);
    edge_ = extent / nb_ * (1.0 + 1e-12);
    const std::size_t nbuckets = std::size_t(nb_) * nb_ * nb_;
    buckets_.assign(nbuckets, {});
    bucket_lo_.assign(nbuckets, Vec3::Constant(std::numeric_limits<double>::infinity()));
    bucket_hi_.assign(nbuckets, Vec3::Constant(-std::numeric_limits<double>::infinity()));
    for (std::uint32_t i = 0; i < pts_.size(); ++i) {
        const Vec3 local = (pts_[i].p - lo_) / edge_;
        const int bx = std::clamp(int(local.x()), 0, nb_ - 1);
        const int by = std::clamp(int(local.y()), 0, nb_ - 1);
        const int bz = std::clamp(int(local.z()), 0, nb_ - 1);
        const std::size_t b = bx + std::size_t(nb_) * (by + std::size_t(nb_) * bz);
        buckets_[b].push_back(i);
        bucket_lo_[b] = bucket_lo_[b].cwiseMin(pts_[i].p);
        bucket_hi_[b] = bucket_hi_[b].cwiseMax(pts_[i].p);
    }
}

PointIndex::Hit PointIndex::nearest(const Vec3& q, const Vec3* hint) const {
    const Vec3 local = (q - lo_) / edge_;
    const int qx = std::clamp(int(std::floor(local.x())), 0, nb_ - 1);
    const int qy = std::clamp(int(std::floor(local.y())), 0, nb_ - 1);
    const int qz = std::clamp(int(std::floor(local.z())), 0, nb_ - 1);

    Hit best;
    best.d2 = std::numeric_limits<double>::infinity();
    best.set = std::numeric_limits<int>::max();
    best.index = std::numeric_limits<int>::max();
    if (hint) {
        // Upper bound only; the sentinel set/index keep any real candidate at
        // the same distance preferred, so the tie-break stays exact.
        best.d2 = (q - *hint).squaredNorm();
        best.point = *hint;
    }

    auto consider = [&](const Entry& e) {
        const double d2 = (q - e.p).squaredNorm();
        if (d2 < best.d2 ||
            (d2 == best.d2 &&
             (e.set < best.set || (e.set == best.set && e.index < best.index)))) {
            best = {d2, e.set, e.index, e.p};
        }
    };

    auto scan_bucket = [&](int bx, int by, int bz) {
        const std::size_t b = bx + std::size_t(nb_) * (by + std::size_t(nb_) * bz);
        const auto& bucket = buckets_[b];
        if (bucket.empty()) return;
        // skip buckets whose point bounding box cannot beat or tie the best
        const Vec3 nearest_in_box = q.cwiseMax(bucket_lo_[b]).cwiseMin(bucket_hi_[b]);
        if ((q - nearest_in_box).squaredNorm() > best.d2) return;
        for (std::uint32_t i : bucket) consider(pts_[i]);
    };

    const int max_shell = 3 * nb_;
    for (int k = 0; k <= max_shell; ++k) {
        if (k > 0) {
            // a bucket at Chebyshev distance k is at least (k-1)*edge away
            // from any point of the query's own bucket
            const double shell_min = (k - 1) * edge_;
            if (shell_min * shell_min > best.d2 &&
                best.d2 < std::numeric_limits<double>::infinity())
                break;
        }
        if (k == 0) {
            scan_bucket(qx, qy, qz);
            continue;
        }
        // the six faces of the Chebyshev shell, without double-visiting edges
        const int x0 = std::max(0, qx - k), x1 = std::min(nb_ - 1, qx + k);
        const int y0 = std::max(0, qy - k), y1 = std::min(nb_ - 1, qy + k);
        const int z0 = std::max(0, qz - k), z1 = std::min(nb_ - 1, qz + k);
        const int yi0 = std::max(0, qy - k + 1), yi1 = std::min(nb_ - 1, qy + k - 1);
        for (int bx : {qx - k, qx + k}) {
            if (bx < 0 || bx >= nb_) continue;
            for (int by = y0; by <= y1; ++by)
                for (int bz = z0; bz <= z1; ++bz) scan_bucket(bx, by, bz);
        }
        const int xi0 = std::max(0, qx - k + 1), xi1 = std::min(nb_ - 1, qx + k - 1);
        for (int by : {qy - k, qy + k}) {
            if (by < 0 || by >= nb_) continue;
            for (int bx = xi0; bx <= xi1; ++bx)
                for (int bz = z0; bz <= z1; ++bz) scan_bucket(bx, by, bz);
        }
        for (int bz : {qz - k, qz + k}) {
            if (bz < 0 || bz >= nb_) continue;
            for (int bx = xi0; bx <= xi1; ++bx)
                for (int by = yi0; by <= yi1; ++by) scan_bucket(bx, by, bz);
        }
    }
    return best;
}

namespace {

UdfGrid field_from_index(const PointIndex& index, const Config& cfg,
                         LabelGrid* labels) {
    const GridGeometry geom = GridGeometry::unit_box(cfg.r);
    UdfGrid udf(geom);
    if (labels) *labels = LabelGrid(geom, 0);
    // Chunked manually (not parallel_for) so each worker can warm-start its
    // queries with the previous voxel's hit; results are exact either way.
    int threads = cfg.threads > 0 ? cfg.threads
                                  : int(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    auto run_range = [&](std::int64_t lo, std::int64_t hi) {
        bool has_hint = false;
        Vec3 hint = Vec3::Zero();
        for (std::int64_t i = lo; i < hi; ++i) {
            const Vec3 x = world_of(coord_of(i, geom.r), geom);
            const PointIndex::Hit hit =
                index.nearest(x, has_hint ? &hint : nullptr);
            hint = hit.point;
            has_hint = true;
            const double d = std::sqrt(hit.d2);
            UdfVoxel& v = udf.at(i);
            v.d = d;
            v.g = d > 0.0 ? Vec3((x - hit.point) / d) : Vec3::Zero();
            if (labels) labels->at(i) = hit.set;
        }
    };
    const std::int64_t n = udf.size();
    if (threads == 1) {
        run_range(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::int64_t chunk = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const std::int64_t lo = t * chunk;
            const std::int64_t hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&run_range, lo, hi] { run_range(lo, hi); });
        }
        for (auto& th : pool) th.join();
    }
    return udf;
}

}  // namespace

UdfGrid udf_from_points(const std::vector<Vec3>& points, const Config& cfg) {
    if (points.empty()) throw EmptyInput("udf_from_points: empty point list");
    PointIndex index(points);
    return field_from_index(index, cfg, nullptr);
}

std::pair<UdfGrid, LabelGrid> udf_from_primitive_samples(
    const std::vector<std::vector<Vec3>>& sample_sets, const Config& cfg) {
    if (sample_sets.empty())
        throw EmptyInput("udf_from_primitive_samples: no sample sets");
    for (const auto& s : sample_sets)
        if (s.empty())
            throw EmptyInput("udf_from_primitive_samples: empty sample set");
    PointIndex index(sample_sets);
    LabelGrid labels;
    UdfGrid udf = field_from_index(index, cfg, &labels);
    return {std::move(udf), std::move(labels)};
}

VoxelGrid<Vec3> finite_gradient(const VoxelGrid<double>& field) {
    const int r = field.r();
    if (r < 3) throw GridTooSmall("finite_gradient: resolution < 3");
    const double h = field.geom.spacing;
    VoxelGrid<Vec3> out(field.geom, Vec3::Zero());
    auto diff = [&](const GridCoord& c, int axis) {
        auto value = [&](int u) {
            GridCoord cc = c;
            (axis == 0 ? cc.x : axis == 1 ? cc.y : cc.z) = u;
            return field.at(cc);
        };
        const int u = axis == 0 ? c.x : axis == 1 ? c.y : c.z;
        if (u == 0) return (value(1) - value(0)) / h;
        if (u == r - 1) return (value(r - 1) - value(r - 2)) / h;
        return (value(u + 1) - value(u - 1)) / (2.0 * h);
    };
    for (std::int64_t i = 0; i < field.size(); ++i) {
        const GridCoord c = coord_of(i, r);
        out.at(i) = Vec3(diff(c, 0), diff(c, 1), diff(c, 2));
    }
    return out;
}

double sample_distance(const UdfGrid& udf, const Vec3& world) {
    const GridGeometry& g = udf.geom;
    // lattice coordinates of voxel centers
    const Vec3 local = (world - g.origin) / g.spacing - Vec3::Constant(0.5);
    double fx = std::clamp(local.x(), 0.0, double(g.r - 1));
    double fy = std::clamp(local.y(), 0.0, double(g.r - 1));
    double fz = std::clamp(local.z(), 0.0, double(g.r - 1));
    const int x0 = std::min(int(fx), g.r - 2 < 0 ? 0 : g.r - 2);
    const int y0 = std::min(int(fy), g.r - 2 < 0 ? 0 : g.r - 2);
    const int z0 = std::min(int(fz), g.r - 2 < 0 ? 0 : g.r - 2);
    const double tx = fx - x0, ty = fy - y0, tz = fz - z0;
    auto d = [&](int x, int y, int z) {
        return udf.at(GridCoord{x, y, z}).d;
    };
    auto lerp = [](double a, double b, double t) { return a + (b - a) * t; };
    const double c00 = lerp(d(x0, y0, z0), d(x0 + 1, y0, z0), tx);
    const double c10 = lerp(d(x0, y0 + 1, z0), d(x0 + 1, y0 + 1, z0), tx);
    const double c01 = lerp(d(x0, y0, z0 + 1), d(x0 + 1, y0, z0 + 1), tx);
    const double c11 = lerp(d(x0, y0 + 1, z0 + 1), d(x0 + 1, y0 + 1, z0 + 1), tx);
    return lerp(lerp(c00, c10, ty), lerp(c01, c11, ty), tz);
}

}  // namespace splitfit
