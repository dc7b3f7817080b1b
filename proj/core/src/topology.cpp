#include "splitfit/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "splitfit/fitting.hpp"
#include "splitfit/types.hpp"

namespace splitfit {

namespace {

double min_pairwise_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b,
                             std::size_t cap = 2000) {
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    auto strided = [cap](const std::vector<Vec3>& v) {
        std::vector<Vec3> out;
        if (v.size() <= cap) return v;
        out.reserve(cap);
        const double step = double(v.size()) / double(cap);
        for (std::size_t i = 0; i < cap; ++i) out.push_back(v[std::size_t(i * step)]);
        return out;
    };
    const std::vector<Vec3> sa = strided(a), sb = strided(b);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : sa)
        for (const Vec3& q : sb) best = std::min(best, (p - q).squaredNorm());
    return std::sqrt(best);
}

/// Parametric sampling over the span the support points actually cover
/// (lines are unbounded; circles and ellipses are sampled fully).
std::vector<Vec3> dedup_samples(const CurveRecord& rec, int n = 64) {
    std::vector<Vec3> out;
    out.reserve(n);
    if (const Line* line = std::get_if<Line>(&rec.prim)) {
        double lo = 0, hi = 0;
        bool first = true;
        for (const Vec3& p : rec.points) {
            const double t = (p - line->point).dot(line->direction);
            lo = first ? t : std::min(lo, t);
            hi = first ? t : std::max(hi, t);
            first = false;
        }
        if (first) return out;
        for (int i = 0; i < n; ++i)
            out.push_back(point_at(rec.prim, lo + (hi - lo) * i / double(n - 1)));
    } else {
        for (int i = 0; i < n; ++i)
            out.push_back(point_at(rec.prim, 2 * M_PI * i / double(n)));
    }
    return out;
}

double sampled_hausdorff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    auto one_sided = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
        double worst = 0;
        for (const Vec3& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec3& q : to) best = std::min(best, (p - q).squaredNorm());
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    return std::max(one_sided(a, b), one_sided(b, a));
}

}  // namespace

BoolMatrix build_surface_adjacency(
    const BoolMatrix& cell_adjacency, const std::vector<int>& surface_cell,
    const std::vector<std::uint8_t>& cell_passthrough,
    const std::vector<std::vector<Vec3>>& surface_points, double eps2) {
    const int nf = int(surface_cell.size());
    const int nc = cell_adjacency.rows();
    BoolMatrix ff(nf, nf);

    auto cells_linked = [&](int ca, int cb) {
        if (ca == cb) return true;  // multi-primitive cell
        if (cell_adjacency.at(ca, cb)) return true;
        for (int m = 0; m < nc; ++m)
            if (cell_passthrough[m] && cell_adjacency.at(ca, m) &&
                cell_adjacency.at(m, cb))
                return true;
        return false;
    };

    for (int i = 0; i < nf; ++i)
        for (int j = i + 1; j < nf; ++j) {
            if (!cells_linked(surface_cell[i], surface_cell[j])) continue;
            if (min_pairwise_distance(surface_points[i], surface_points[j]) < eps2)
                ff.set_sym(i, j);
        }
    return ff;
}

std::vector<Vec3> common_points(const SurfacePrimitive& fi, const SurfacePrimitive& fj,
                                const std::vector<Vec3>& pi,
                                const std::vector<Vec3>& pj, double eps2) {
    std::vector<Vec3> out;
    for (const Vec3& p : pi)
        if (distance(fj, p) < eps2) out.push_back(p);
    for (const Vec3& p : pj)
        if (distance(fi, p) < eps2) out.push_back(p);
    return out;
}

std::vector<IntersectionSample> intersect_surfaces(const SurfacePrimitive& fi,
                                                   const SurfacePrimitive& fj,
                                                   const std::vector<Vec3>& seeds,
                                                   double tol, int max_rounds) {
    std::vector<IntersectionSample> out;
    for (const Vec3& seed : seeds) {
        Vec3 x = seed;
        double ri = distance(fi, x), rj = distance(fj, x);
        for (int round = 0; round < max_rounds && (ri > tol || rj > tol); ++round) {
            x = project(fi, x);
            x = project(fj, x);
            ri = distance(fi, x);
            rj = distance(fj, x);
        }
        if (ri <= tol && rj <= tol) out.push_back({x, ri, rj});
    }
    if (out.empty())
        throw NoIntersection("intersect_surfaces: no seed converged");
    return out;
}

CurveExtraction extract_curves(const std::vector<SurfacePrimitive>& surfaces,
                               const BoolMatrix& FF,
                               const std::vector<std::vector<Vec3>>& surface_points,
                               const std::vector<CurveRecord>& cell_curves,
                               const Config& cfg) {
    const int nf = int(surfaces.size());
    std::vector<CurveRecord> pool = cell_curves;

    for (int i = 0; i < nf; ++i)
        for (int j = i + 1; j < nf; ++j) {
            if (!FF.at(i, j)) continue;
            const std::vector<Vec3> seeds = common_points(
                surfaces[i], surfaces[j], surface_points[i], surface_points[j],
                cfg.eps2);
            if (seeds.empty()) continue;
            std::vector<IntersectionSample> samples;
            try {
                samples = intersect_surfaces(surfaces[i], surfaces[j], seeds);
            } catch (const NoIntersection&) {
                continue;
            }
            std::vector<Vec3> pts;
            pts.reserve(samples.size());
            for (const auto& s : samples) pts.push_back(s.point);
            FitResult best;
            try {
                best = fit_best_curve(pts);
            } catch (const AllKindsFailed&) {
                continue;
            }
            if (!(best.rms < 10 * cfg.eps1)) continue;
            CurveRecord rec;
            rec.prim = best.curve();
            rec.rms = best.rms;
            rec.points = std::move(pts);
            rec.parents = {i, j};
            pool.push_back(std::move(rec));
        }

    // canonical order before dedup: (min parent, rms)
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    auto key = [&](std::size_t k) {
        const auto& ps = pool[k].parents;
        const int mp = ps.empty() ? std::numeric_limits<int>::max()
                                  : *std::min_element(ps.begin(), ps.end());
        return std::pair<int, double>(mp, pool[k].rms);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

    CurveExtraction out;
    std::vector<std::vector<Vec3>> kept_samples;
    for (std::size_t k : order) {
        CurveRecord& rec = pool[k];
        const std::vector<Vec3> samples = dedup_samples(rec);
        bool duplicate = false;
        for (std::size_t e = 0; e < out.curves.size(); ++e) {
            if (sampled_hausdorff(samples, kept_samples[e]) < cfg.eps3 / 2) {
                // same geometric curve: union the parent surfaces
                for (int p : rec.parents)
                    if (std::find(out.curves[e].parents.begin(),
                                  out.curves[e].parents.end(),
                                  p) == out.curves[e].parents.end())
                        out.curves[e].parents.push_back(p);
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            kept_samples.push_back(samples);
            out.curves.push_back(std::move(rec));
        }
    }

    out.FE = BoolMatrix(nf, int(out.curves.size()));
    for (int e = 0; e < int(out.curves.size()); ++e)
        for (int f : out.curves[e].parents)
            if (f >= 0 && f < nf) out.FE.set(f, e);
    return out;
}

BoolMatrix build_curve_adjacency(const BoolMatrix& FE,
                                 const std::vector<CurveRecord>& curves,
                                 double eps3) {
    const int ne = int(curves.size());
    const int nf = FE.rows();
    BoolMatrix ee(ne, ne);
    for (int i = 0; i < ne; ++i)
        for (int j = i + 1; j < ne; ++j) {
            bool share = false;
            for (int k = 0; k < nf && !share; ++k)
                share = FE.at(k, i) && FE.at(k, j);
            if (!share) continue;
            if (min_pairwise_distance(curves[i].points, curves[j].points) < eps3)
                ee.set_sym(i, j);
        }
    return ee;
}

namespace {

double min_distance_to_set(const Vec3& p, const std::vector<Vec3>& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : set) best = std::min(best, (p - q).squaredNorm());
    return std::sqrt(best);
}

/// Closest-approach point between two curves from a seed, by alternating
/// projection. Returns the midpoint and the final gap.
std::pair<Vec3, double> closest_approach(const CurvePrimitive& a,
                                         const CurvePrimitive& b, Vec3 x,
                                         int rounds = 50) {
    Vec3 xa = project(a, x), xb = project(b, xa);
    for (int i = 0; i < rounds; ++i) {
        const Vec3 na = project(a, xb);
        const Vec3 nb = project(b, na);
        if ((na - xa).norm() < 1e-12 && (nb - xb).norm() < 1e-12) {
            xa = na;
            xb = nb;
            break;
        }
        xa = na;
        xb = nb;
    }
    return {0.5 * (xa + xb), (xa - xb).norm()};
}

}  // namespace

VertexExtraction extract_vertices(const std::vector<CurveRecord>& curves,
                                  const BoolMatrix& EE, const BoolMatrix& FE,
                                  double eps3) {
    const int ne = int(curves.size());

    struct Candidate {
        Vec3 point;
        std::vector<int> parent_curves;
    };
    std::vector<Candidate> raw;

    for (int i = 0; i < ne; ++i)
        for (int j = i + 1; j < ne; ++j) {
            if (!EE.at(i, j)) continue;
            // seeds: support points of both curves, capped
            std::vector<Vec3> seeds;
            auto add_seeds = [&](const std::vector<Vec3>& pts) {
                const std::size_t cap = 48;
                const double step =
                    std::max(1.0, double(pts.size()) / double(cap));
                for (double t = 0; t < double(pts.size()); t += step)
                    seeds.push_back(pts[std::size_t(t)]);
            };
            add_seeds(curves[i].points);
            add_seeds(curves[j].points);

            bool found = false;
            Vec3 best_point = Vec3::Zero();
            double best_score = std::numeric_limits<double>::infinity();
            for (const Vec3& s : seeds) {
                const auto [mid, gap] =
                    closest_approach(curves[i].prim, curves[j].prim, s);
                if (gap >= eps3) continue;
                const double score = min_distance_to_set(mid, curves[i].points) +
                                     min_distance_to_set(mid, curves[j].points);
                if (score < best_score) {
                    best_score = score;
                    best_point = mid;
                    found = true;
                }
            }
            if (found) raw.push_back({best_point, {i, j}});
        }

    // dedup by averaging clusters closer than eps3/2
    VertexExtraction out;
    std::vector<Vec3> sums;
    std::vector<int> counts;
    std::vector<std::vector<int>> parent_sets;
    for (const Candidate& c : raw) {
        int home = -1;
        for (std::size_t v = 0; v < sums.size(); ++v) {
            if ((sums[v] / counts[v] - c.point).norm() < eps3 / 2) {
                home = int(v);
                break;
            }
        }
        if (home < 0) {
            sums.push_back(c.point);
            counts.push_back(1);
            parent_sets.push_back(c.parent_curves);
        } else {
            sums[home] += c.point;
            counts[home] += 1;
            for (int e : c.parent_curves)
                if (std::find(parent_sets[home].begin(), parent_sets[home].end(),
                              e) == parent_sets[home].end())
                    parent_sets[home].push_back(e);
        }
    }

    const int nv = int(sums.size());
    out.vertices.reserve(nv);
    for (int v = 0; v < nv; ++v) out.vertices.push_back(sums[v] / counts[v]);
    out.EV = BoolMatrix(ne, nv);
    for (int v = 0; v < nv; ++v)
        for (int e : parent_sets[v]) out.EV.set(e, v);
    out.FV = BoolMatrix(FE.rows(), nv);
    for (int f = 0; f < FE.rows(); ++f)
        for (int e = 0; e < ne; ++e)
            if (FE.at(f, e))
                for (int v = 0; v < nv; ++v)
                    if (out.EV.at(e, v)) out.FV.set(f, v);
    return out;
}

AssembledBRep assemble_brep(std::vector<Vec3> vertices,
                            std::vector<CurvePrimitive> curves,
                            std::vector<SurfacePrimitive> surfaces, BoolMatrix FF,
                            BoolMatrix FE, BoolMatrix EE, BoolMatrix EV,
                            BoolMatrix FV, double eps3) {
    const int nv = int(vertices.size());
    const int ne = int(curves.size());
    const int nf = int(surfaces.size());
    auto dims_ok = [](const BoolMatrix& m, int r, int c) {
        return m.rows() == r && m.cols() == c;
    };
    if (!dims_ok(FF, nf, nf) || !dims_ok(FE, nf, ne) || !dims_ok(EE, ne, ne) ||
        !dims_ok(EV, ne, nv) || !dims_ok(FV, nf, nv))
        throw InconsistentTopology("assemble_brep: matrix dimensions do not match element counts");

    AssembledBRep out;
    if (!FF.symmetric_zero_diagonal())
        out.warnings.push_back("FF not symmetric with zero diagonal");
    if (!EE.symmetric_zero_diagonal())
        out.warnings.push_back("EE not symmetric with zero diagonal");
    for (int e = 0; e < ne; ++e)
        for (int v = 0; v < nv; ++v)
            if (EV.at(e, v) && distance(curves[e], vertices[v]) > eps3)
                out.warnings.push_back("vertex " + std::to_string(v) +
                                       " lies off curve " + std::to_string(e));

    out.model.vertices = std::move(vertices);
    out.model.curves = std::move(curves);
    out.model.surfaces = std::move(surfaces);
    out.model.FF = std::move(FF);
    out.model.FE = std::move(FE);
    out.model.EE = std::move(EE);
    out.model.EV = std::move(EV);
    out.model.FV = std::move(FV);
    return out;
}

}  // namespace splitfit
