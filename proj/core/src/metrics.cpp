#include "splitfit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <tuple>

#include "splitfit/parallel.hpp"
#include "splitfit/types.hpp"
#include "splitfit/udf.hpp"

namespace splitfit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

int target_count(double density, double measure) {
    return std::max(16, int(std::llround(density * measure)));
}

// Van der Corput radical inverse, base 2; pairs with i/n for a deterministic
// low-discrepancy point set on the unit square.
double radical_inverse(std::uint32_t i) {
    i = (i << 16u) | (i >> 16u);
    i = ((i & 0x55555555u) << 1u) | ((i & 0xAAAAAAAAu) >> 1u);
    i = ((i & 0x33333333u) << 2u) | ((i & 0xCCCCCCCCu) >> 2u);
    i = ((i & 0x0F0F0F0Fu) << 4u) | ((i & 0xF0F0F0F0u) >> 4u);
    i = ((i & 0x00FF00FFu) << 8u) | ((i & 0xFF00FF00u) >> 8u);
    return double(i) * 2.3283064365386963e-10;
}

// Clip a convex polygon against the half-space n.x <= b.
std::vector<Vec3> clip_halfspace(const std::vector<Vec3>& poly, const Vec3& n,
                                 double b) {
    std::vector<Vec3> out;
    const int m = int(poly.size());
    for (int i = 0; i < m; ++i) {
        const Vec3& p = poly[i];
        const Vec3& q = poly[(i + 1) % m];
        const double dp = n.dot(p) - b;
        const double dq = n.dot(q) - b;
        if (dp <= 0) out.push_back(p);
        if ((dp < 0 && dq > 0) || (dp > 0 && dq < 0)) {
            out.push_back(p + (dp / (dp - dq)) * (q - p));
        }
    }
    return out;
}

std::vector<Vec3> plane_clip_polygon(const Plane& prim,
                                     const Eigen::AlignedBox3d& box) {
    const Vec3 c = box.center();
    const Vec3 p0 = c - (prim.normal.dot(c) - prim.offset) * prim.normal;
    const auto [u, w] = any_orthonormal(prim.normal);
    const double half = box.diagonal().norm() + 1.0;
    std::vector<Vec3> poly = {p0 - half * u - half * w, p0 + half * u - half * w,
                              p0 + half * u + half * w, p0 - half * u + half * w};
    for (int ax = 0; ax < 3 && !poly.empty(); ++ax) {
        Vec3 n = Vec3::Zero();
        n[ax] = 1;
        poly = clip_halfspace(poly, n, box.max()[ax]);
        if (poly.empty()) break;
        poly = clip_halfspace(poly, -n, -box.min()[ax]);
    }
    return poly;
}

double polygon_area(const std::vector<Vec3>& poly) {
    double a2 = 0;
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        a2 += (poly[i] - poly[0]).cross(poly[i + 1] - poly[0]).norm();
    }
    return 0.5 * a2;
}

void sample_triangle(const Vec3& a, const Vec3& b, const Vec3& c, int n,
                     std::vector<Vec3>& out) {
    for (int i = 0; i < n; ++i) {
        double u = (i + 0.5) / n;
        double v = radical_inverse(std::uint32_t(i));
        if (u + v > 1) {
            u = 1 - u;
            v = 1 - v;
        }
        out.push_back(a + u * (b - a) + v * (c - a));
    }
}

// Largest-remainder allocation of `total` samples proportional to `weight`.
std::vector<int> allocate(const std::vector<double>& weight, int total) {
    const double sum = std::accumulate(weight.begin(), weight.end(), 0.0);
    const int m = int(weight.size());
    std::vector<int> counts(m, 0);
    std::vector<std::pair<double, int>> rem(m);
    int used = 0;
    for (int i = 0; i < m; ++i) {
        const double exact = sum > 0 ? total * weight[i] / sum : double(total) / m;
        counts[i] = int(std::floor(exact));
        used += counts[i];
        rem[i] = {exact - counts[i], i};
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        return a.first > b.first;
    });
    for (int k = 0; k < total - used; ++k) counts[rem[k % m].second]++;
    return counts;
}

std::vector<Vec3> sample_plane(const Plane& prim, double density,
                               const Eigen::AlignedBox3d& box) {
    const std::vector<Vec3> poly = plane_clip_polygon(prim, box);
    const double area = poly.size() >= 3 ? polygon_area(poly) : 0.0;
    if (area < 1e-12) throw EmptyExtent("plane does not intersect the extent");
    const int n = target_count(density, area);
    std::vector<double> tri_area;
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        tri_area.push_back(0.5 * (poly[i] - poly[0]).cross(poly[i + 1] - poly[0]).norm());
    }
    const std::vector<int> counts = allocate(tri_area, n);
    std::vector<Vec3> out;
    out.reserve(n);
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        sample_triangle(poly[0], poly[i], poly[i + 1], counts[i - 1], out);
    }
    return out;
}

std::vector<Vec3> sample_sphere(const Sphere& prim, double density) {
    const double area = 4.0 * kPi * prim.radius * prim.radius;
    const int n = target_count(density, area);
    std::vector<Vec3> out;
    out.reserve(n);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        out.push_back(prim.center +
                      prim.radius * Vec3(rho * std::cos(phi), rho * std::sin(phi), z));
    }
    return out;
}

// Axis-parameter interval covered by the extent box: projections of the box
// corners onto the axis (conservative — ignores radial escape).
std::pair<double, double> axis_range(const Vec3& anchor, const Vec3& axis,
                                     const Eigen::AlignedBox3d& box) {
    double lo = kInf, hi = -kInf;
    for (int k = 0; k < 8; ++k) {
        const Vec3 corner = box.corner(Eigen::AlignedBox3d::CornerType(k));
        const double t = axis.dot(corner - anchor);
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    return {lo, hi};
}

// Rows of `row_weight.size()` rings; ring j gets points at equal angles with a
// deterministic half-step offset.
std::vector<Vec3> sample_rings(int n, const std::vector<double>& row_weight,
                               const std::function<Vec3(int, double)>& point) {
    const std::vector<int> counts = allocate(row_weight, n);
    std::vector<Vec3> out;
    out.reserve(n);
    for (std::size_t j = 0; j < counts.size(); ++j) {
        for (int i = 0; i < counts[j]; ++i) {
            out.push_back(point(int(j), 2.0 * kPi * (i + 0.5) / counts[j]));
        }
    }
    return out;
}

std::vector<Vec3> sample_cylinder(const Cylinder& prim, double density,
                                  const Eigen::AlignedBox3d& box) {
    auto [t0, t1] = axis_range(prim.point, prim.axis, box);
    if (t1 - t0 < 1e-12) throw EmptyExtent("cylinder extent is empty");
    const double circ = 2.0 * kPi * prim.radius;
    const int n = target_count(density, circ * (t1 - t0));
    const int rows = std::max(1, int(std::lround(std::sqrt(n * (t1 - t0) / circ))));
    const auto [u, w] = any_orthonormal(prim.axis);
    std::vector<double> weight(rows, 1.0);
    return sample_rings(n, weight, [&](int j, double ang) -> Vec3 {
        const double t = t0 + (j + 0.5) / rows * (t1 - t0);
        return prim.point + t * prim.axis +
               prim.radius * (std::cos(ang) * u + std::sin(ang) * w);
    });
}

std::vector<Vec3> sample_cone(const Cone& prim, double density,
                              const Eigen::AlignedBox3d& box) {
    auto [h0, h1] = axis_range(prim.apex, prim.axis, box);
    h0 = std::max(h0, 0.0);
    if (h1 - h0 < 1e-12) throw EmptyExtent("cone extent is empty");
    const double ct = std::cos(prim.half_angle), st = std::sin(prim.half_angle);
    const double s0 = h0 / ct, s1 = h1 / ct;  // slant range
    const double area = kPi * st * (s1 * s1 - s0 * s0);
    const int n = target_count(density, area);
    const double mean_circ = kPi * st * (s0 + s1);
    const int rows =
        std::max(1, int(std::lround(std::sqrt(n * (s1 - s0) / std::max(mean_circ, 1e-12)))));
    const auto [u, w] = any_orthonormal(prim.axis);
    std::vector<double> weight(rows);
    for (int j = 0; j < rows; ++j) weight[j] = s0 + (j + 0.5) / rows * (s1 - s0);
    return sample_rings(n, weight, [&](int j, double ang) -> Vec3 {
        const double s = s0 + (j + 0.5) / rows * (s1 - s0);
        const double rho = s * st;
        return prim.apex + s * ct * prim.axis +
               rho * (std::cos(ang) * u + std::sin(ang) * w);
    });
}

std::vector<Vec3> sample_torus(const Torus& prim, double density) {
    const double area = 4.0 * kPi * kPi * prim.major_radius * prim.minor_radius;
    const int n = target_count(density, area);
    const double lu = 2.0 * kPi * prim.major_radius;
    const double lv = 2.0 * kPi * prim.minor_radius;
    const int rows = std::max(1, int(std::lround(std::sqrt(n * lu / lv))));
    const auto [u, w] = any_orthonormal(prim.axis);
    std::vector<double> weight(rows, 1.0);
    return sample_rings(n, weight, [&](int j, double psi) -> Vec3 {
        const double phi = 2.0 * kPi * (j + 0.5) / rows;
        const Vec3 dir = std::cos(phi) * u + std::sin(phi) * w;
        return prim.center +
               (prim.major_radius + prim.minor_radius * std::cos(psi)) * dir +
               prim.minor_radius * std::sin(psi) * prim.axis;
    });
}

std::vector<Vec3> sample_line(const Line& prim, double density,
                              const Eigen::AlignedBox3d& box) {
    // Slab clipping of the infinite line against the box.
    double t0 = -kInf, t1 = kInf;
    for (int ax = 0; ax < 3; ++ax) {
        const double d = prim.direction[ax];
        const double o = prim.point[ax];
        if (std::abs(d) < 1e-15) {
            if (o < box.min()[ax] - 1e-12 || o > box.max()[ax] + 1e-12) {
                throw EmptyExtent("line does not intersect the extent");
            }
            continue;
        }
        double a = (box.min()[ax] - o) / d;
        double b = (box.max()[ax] - o) / d;
        if (a > b) std::swap(a, b);
        t0 = std::max(t0, a);
        t1 = std::min(t1, b);
    }
    if (!(t1 - t0 > 1e-12)) throw EmptyExtent("line does not intersect the extent");
    const int n = target_count(density, t1 - t0);
    std::vector<Vec3> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        out.push_back(prim.point + (t0 + (i + 0.5) / n * (t1 - t0)) * prim.direction);
    }
    return out;
}

std::vector<Vec3> sample_circle(const Circle& prim, double density) {
    const int n = target_count(density, 2.0 * kPi * prim.radius);
    const auto [u, w] = any_orthonormal(prim.normal);
    std::vector<Vec3> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double ang = 2.0 * kPi * (i + 0.5) / n;
        out.push_back(prim.center + prim.radius * (std::cos(ang) * u + std::sin(ang) * w));
    }
    return out;
}

std::vector<Vec3> sample_ellipse(const Ellipse& prim, double density) {
    const Vec3 u = prim.major_axis;
    const Vec3 w = prim.normal.cross(u);
    auto at = [&](double ang) -> Vec3 {
        return prim.center + prim.a * std::cos(ang) * u + prim.b * std::sin(ang) * w;
    };
    // Arc-length table for equal-arc placement.
    constexpr int kSeg = 1024;
    std::vector<double> cum(kSeg + 1, 0.0);
    Vec3 prev = at(0.0);
    for (int i = 1; i <= kSeg; ++i) {
        const Vec3 cur = at(2.0 * kPi * i / kSeg);
        cum[i] = cum[i - 1] + (cur - prev).norm();
        prev = cur;
    }
    const double perimeter = cum[kSeg];
    const int n = target_count(density, perimeter);
    std::vector<Vec3> out;
    out.reserve(n);
    int seg = 0;
    for (int i = 0; i < n; ++i) {
        const double target = (i + 0.5) / n * perimeter;
        while (seg < kSeg - 1 && cum[seg + 1] < target) ++seg;
        const double f = (target - cum[seg]) / std::max(cum[seg + 1] - cum[seg], 1e-300);
        out.push_back(at(2.0 * kPi * (seg + f) / kSeg));
    }
    return out;
}

double mean_nearest(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double sum = 0;
    if (b.size() >= 256) {  // bucket-grid lookups beat the quadratic scan
        const PointIndex idx(b);
        for (const Vec3& p : a) sum += std::sqrt(idx.nearest(p).d2);
    } else {
        for (const Vec3& p : a) {
            double best = kInf;
            for (const Vec3& q : b) best = std::min(best, (p - q).squaredNorm());
            sum += std::sqrt(best);
        }
    }
    return sum / double(a.size());
}

// Shortest-augmenting-path solution of the min-cost assignment problem for
// rows <= cols; returns row -> col.
std::vector<int> assign_rows(const Eigen::MatrixXd& a) {
    const int n = int(a.rows()), m = int(a.cols());
    std::vector<double> u(n + 1, 0), v(m + 1, 0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j) {
        if (p[j]) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

ClassMatching match_class(const std::vector<std::vector<Vec3>>& pred,
                          const std::vector<std::vector<Vec3>>& gt) {
    ClassMatching out;
    const int np = int(pred.size()), ng = int(gt.size());
    if (np == 0 || ng == 0) return out;
    Eigen::MatrixXd cost(np, ng);
    parallel_for(std::int64_t(np) * ng, 0, [&](std::int64_t k) {
        const int i = int(k / ng), j = int(k % ng);
        // Sentinel cost for unsampleable primitives keeps the matrix finite.
        cost(i, j) = (pred[i].empty() || gt[j].empty()) ? 1e6
                                                        : chamfer(pred[i], gt[j]);
    });
    std::vector<std::pair<int, int>> pairs;
    if (np <= ng) {
        const std::vector<int> rc = assign_rows(cost);
        for (int i = 0; i < np; ++i) pairs.push_back({i, rc[i]});
    } else {
        const std::vector<int> cr = assign_rows(cost.transpose());
        for (int j = 0; j < ng; ++j) pairs.push_back({cr[j], j});
        std::sort(pairs.begin(), pairs.end());
    }
    for (const auto& [i, j] : pairs) {
        out.pairs.push_back({i, j});
        out.cd.push_back(cost(i, j));
    }
    return out;
}

ClassReport score_class(const ClassMatching& m, int n_pred, int n_gt, double t) {
    ClassReport r;
    r.total_count = n_pred;
    for (std::size_t k = 0; k < m.pairs.size(); ++k) {
        if (m.cd[k] < t) {
            r.matched.push_back(m.pairs[k]);
            r.good_count++;
        }
    }
    r.precision = n_pred > 0 ? double(r.good_count) / n_pred : 0.0;
    r.recall = n_gt > 0 ? double(r.good_count) / n_gt : 0.0;
    r.f1 = (r.precision + r.recall) > 0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

// pred index -> gt index for pairs matched under the threshold.
std::vector<int> matched_map(const ClassMatching& m, int n_pred, double t) {
    std::vector<int> map(n_pred, -1);
    for (std::size_t k = 0; k < m.pairs.size(); ++k) {
        if (m.cd[k] < t) map[m.pairs[k].first] = m.pairs[k].second;
    }
    return map;
}

// F1 over a relation matrix: TP iff both endpoints matched and the
// counterpart entry is set; denominators are all set entries on each side.
double relation_f1(const BoolMatrix& pred_rel, const BoolMatrix& gt_rel,
                   const std::vector<int>& row_map,
                   const std::vector<int>& col_map) {
    int pred_ones = 0, gt_ones = 0, tp = 0;
    for (int i = 0; i < pred_rel.rows(); ++i) {
        for (int j = 0; j < pred_rel.cols(); ++j) {
            if (!pred_rel.at(i, j)) continue;
            pred_ones++;
            if (row_map[i] >= 0 && col_map[j] >= 0 &&
                gt_rel.at(row_map[i], col_map[j])) {
                tp++;
            }
        }
    }
    for (int i = 0; i < gt_rel.rows(); ++i) {
        for (int j = 0; j < gt_rel.cols(); ++j) {
            if (gt_rel.at(i, j)) gt_ones++;
        }
    }
    const double p = pred_ones > 0 ? double(tp) / pred_ones : 0.0;
    const double r = gt_ones > 0 ? double(tp) / gt_ones : 0.0;
    return (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace

std::vector<Vec3> sample_primitive(const SurfacePrimitive& prim, double density,
                                   const Eigen::AlignedBox3d& extent) {
    if (!(density > 0)) throw EmptyExtent("sample density must be positive");
    switch (surface_kind(prim)) {
        case SurfaceKind::Plane:
            return sample_plane(std::get<Plane>(prim), density, extent);
        case SurfaceKind::Sphere:
            return sample_sphere(std::get<Sphere>(prim), density);
        case SurfaceKind::Cylinder:
            return sample_cylinder(std::get<Cylinder>(prim), density, extent);
        case SurfaceKind::Cone:
            return sample_cone(std::get<Cone>(prim), density, extent);
        case SurfaceKind::Torus:
            return sample_torus(std::get<Torus>(prim), density);
    }
    throw ValueOutOfRange("unknown surface kind");
}

std::vector<Vec3> sample_primitive(const CurvePrimitive& prim, double density,
                                   const Eigen::AlignedBox3d& extent) {
    if (!(density > 0)) throw EmptyExtent("sample density must be positive");
    switch (curve_kind(prim)) {
        case CurveKind::Line:
            return sample_line(std::get<Line>(prim), density, extent);
        case CurveKind::Circle:
            return sample_circle(std::get<Circle>(prim), density);
        case CurveKind::Ellipse:
            return sample_ellipse(std::get<Ellipse>(prim), density);
    }
    throw ValueOutOfRange("unknown curve kind");
}

double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    if (a.empty() || b.empty()) throw EmptyInput("chamfer requires non-empty sets");
    return 0.5 * (mean_nearest(a, b) + mean_nearest(b, a));
}

std::vector<std::pair<int, int>> optimal_assignment(const Eigen::MatrixXd& cost) {
    std::vector<std::pair<int, int>> pairs;
    if (cost.rows() == 0 || cost.cols() == 0) return pairs;
    if (cost.rows() <= cost.cols()) {
        const std::vector<int> rc = assign_rows(cost);
        for (int i = 0; i < cost.rows(); ++i) pairs.push_back({i, rc[i]});
    } else {
        const std::vector<int> cr = assign_rows(cost.transpose());
        for (int j = 0; j < cost.cols(); ++j) pairs.push_back({cr[j], j});
        std::sort(pairs.begin(), pairs.end());
    }
    return pairs;
}

DetectionResult detection_scores(const PrimitiveLists& pred,
                                 const PrimitiveLists& gt,
                                 const std::vector<double>& thresholds,
                                 double sample_density,
                                 const Eigen::AlignedBox3d& extent) {
    auto sample_all = [&](const PrimitiveLists& lists) {
        std::vector<std::vector<Vec3>> vx, cv, sf;
        for (const Vec3& v : lists.vertices) vx.push_back({v});
        for (const CurvePrimitive& c : lists.curves) {
            try {
                cv.push_back(sample_primitive(c, sample_density, extent));
            } catch (const EmptyExtent&) {
                cv.push_back({});
            }
        }
        for (const SurfacePrimitive& s : lists.surfaces) {
            try {
                sf.push_back(sample_primitive(s, sample_density, extent));
            } catch (const EmptyExtent&) {
                sf.push_back({});
            }
        }
        return std::tuple{vx, cv, sf};
    };
    auto [pvx, pcv, psf] = sample_all(pred);
    auto [gvx, gcv, gsf] = sample_all(gt);

    DetectionResult out;
    out.vertex_matching = match_class(pvx, gvx);
    out.curve_matching = match_class(pcv, gcv);
    out.surface_matching = match_class(psf, gsf);

    double pv = 0, rv = 0, fv = 0, pc = 0, rc = 0, fc = 0, ps = 0, rs = 0, fs = 0;
    for (double t : thresholds) {
        DetectionReport rep;
        rep.threshold = t;
        rep.vertex = score_class(out.vertex_matching, int(pvx.size()), int(gvx.size()), t);
        rep.curve = score_class(out.curve_matching, int(pcv.size()), int(gcv.size()), t);
        rep.surface = score_class(out.surface_matching, int(psf.size()), int(gsf.size()), t);
        pv += rep.vertex.precision, rv += rep.vertex.recall, fv += rep.vertex.f1;
        pc += rep.curve.precision, rc += rep.curve.recall, fc += rep.curve.f1;
        ps += rep.surface.precision, rs += rep.surface.recall, fs += rep.surface.f1;
        out.per_threshold.push_back(std::move(rep));
    }
    const double nt = std::max<std::size_t>(1, thresholds.size());
    auto mean_report = [&](ClassReport& r, double p, double rr, double f, int total) {
        r.precision = p / nt;
        r.recall = rr / nt;
        r.f1 = f / nt;
        r.total_count = total;
        r.good_count = int(std::llround(r.precision * total));
    };
    mean_report(out.averaged.vertex, pv, rv, fv, int(pvx.size()));
    mean_report(out.averaged.curve, pc, rc, fc, int(pcv.size()));
    mean_report(out.averaged.surface, ps, rs, fs, int(psf.size()));
    return out;
}

TopoScores topo_f1(const BRepModel& pred, const BRepModel& gt,
                   const DetectionResult& matching, double threshold) {
    const std::vector<int> fmap =
        matched_map(matching.surface_matching, pred.n_surfaces(), threshold);
    const std::vector<int> emap =
        matched_map(matching.curve_matching, pred.n_curves(), threshold);
    const std::vector<int> vmap =
        matched_map(matching.vertex_matching, pred.n_vertices(), threshold);
    TopoScores s;
    s.fe_f1 = relation_f1(pred.FE, gt.FE, fmap, emap);
    s.ev_f1 = relation_f1(pred.EV, gt.EV, emap, vmap);
    return s;
}

}  // namespace splitfit
