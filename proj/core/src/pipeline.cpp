#include "splitfit/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>
#include <numeric>

#include "splitfit/boundary.hpp"
#include "splitfit/gt_voronoi.hpp"
#include "splitfit/parallel.hpp"
#include "splitfit/types.hpp"

namespace splitfit {
namespace {

// Reorder vertices canonically: by lowest incident curve, then position.
void sort_vertices(std::vector<Vec3>& vertices, BoolMatrix& EV, BoolMatrix& FV) {
    const int nv = int(vertices.size());
    if (nv < 2) return;
    std::vector<int> min_curve(nv, std::numeric_limits<int>::max());
    for (int e = 0; e < EV.rows(); ++e) {
        for (int v = 0; v < nv; ++v) {
            if (EV.at(e, v)) min_curve[v] = std::min(min_curve[v], e);
        }
    }
    std::vector<int> order(nv);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (min_curve[a] != min_curve[b]) return min_curve[a] < min_curve[b];
        const Vec3 &pa = vertices[a], &pb = vertices[b];
        if (pa.x() != pb.x()) return pa.x() < pb.x();
        if (pa.y() != pb.y()) return pa.y() < pb.y();
        return pa.z() < pb.z();
    });
    std::vector<Vec3> nverts(nv);
    BoolMatrix nEV(EV.rows(), nv), nFV(FV.rows(), nv);
    for (int k = 0; k < nv; ++k) {
        nverts[k] = vertices[order[k]];
        for (int e = 0; e < EV.rows(); ++e) nEV.set(e, k, EV.at(e, order[k]));
        for (int f = 0; f < FV.rows(); ++f) nFV.set(f, k, FV.at(f, order[k]));
    }
    vertices = std::move(nverts);
    EV = std::move(nEV);
    FV = std::move(nFV);
}

Vec3 map_point(const Vec3& p, double k, const Vec3& t) { return k * p + t; }

// Deterministic stride subsample; the topology stage only needs enough point
// density to resolve the eps2/eps3 proximity tests.
std::vector<Vec3> topo_subsample(const std::vector<Vec3>& pts, std::size_t cap) {
    if (pts.size() <= cap) return pts;
    std::vector<Vec3> out;
    out.reserve(cap);
    const double step = double(pts.size()) / double(cap);
    for (std::size_t i = 0; i < cap; ++i) out.push_back(pts[std::size_t(i * step)]);
    return out;
}

constexpr std::size_t kTopoCap = 2000;

}  // namespace

BRepModel denormalize(const BRepModel& model, const Normalization& n) {
    // from_unit(p) = (p - 0.5)/scale + offset = k*p + t
    const double k = 1.0 / n.scale;
    const Vec3 t = n.offset - Vec3::Constant(0.5 * k);
    BRepModel out = model;
    for (Vec3& v : out.vertices) v = map_point(v, k, t);
    for (SurfacePrimitive& s : out.surfaces) {
        if (auto* p = std::get_if<Plane>(&s)) {
            p->offset = k * p->offset + p->normal.dot(t);
        } else if (auto* sp = std::get_if<Sphere>(&s)) {
            sp->center = map_point(sp->center, k, t);
            sp->radius *= k;
        } else if (auto* cy = std::get_if<Cylinder>(&s)) {
            cy->point = map_point(cy->point, k, t);
            cy->radius *= k;
        } else if (auto* co = std::get_if<Cone>(&s)) {
            co->apex = map_point(co->apex, k, t);
        } else if (auto* to = std::get_if<Torus>(&s)) {
            to->center = map_point(to->center, k, t);
            to->major_radius *= k;
            to->minor_radius *= k;
        }
    }
    for (CurvePrimitive& c : out.curves) {
        if (auto* l = std::get_if<Line>(&c)) {
            l->point = map_point(l->point, k, t);
        } else if (auto* ci = std::get_if<Circle>(&c)) {
            ci->center = map_point(ci->center, k, t);
            ci->radius *= k;
        } else if (auto* el = std::get_if<Ellipse>(&c)) {
            el->center = map_point(el->center, k, t);
            el->a *= k;
            el->b *= k;
        }
    }
    return out;
}

PipelineResult run_stages(std::optional<UdfGrid> udf, BoundaryGrid boundary,
                          std::optional<std::vector<Vec3>> input_points,
                          const Config& cfg) {
    if (!cfg.valid()) throw ValueOutOfRange("invalid pipeline config");
    PipelineResult res;
    res.raw_boundary = boundary;
    res.boundary = udf ? fill_holes(boundary, *udf) : boundary;
    res.cells = grow_regions(res.boundary);
    res.cells.adjacency = cell_adjacency(res.cells, res.boundary);

    if (udf) {
        res.cell_points = assign_points(res.cells, *udf, input_points);
    } else {
        if (!input_points) {
            throw EmptyInput("no UDF and no input points to fit against");
        }
        // Dummy UDF carries only the grid geometry for point lookup.
        UdfGrid dummy(res.boundary.p.geom);
        res.cell_points = assign_points(res.cells, dummy, input_points);
    }
    res.udf = std::move(udf);

    const int nc = res.cells.n_cells;
    const double min_extent = 3.0 * cfg.spacing();
    res.fits.resize(nc);
    parallel_for(nc, cfg.threads, [&](std::int64_t c) {
        res.fits[c] = fit_cell(res.cell_points.points[c], cfg.eps1,
                               cfg.seed + std::uint64_t(c), min_extent);
    });

    // Surfaces in cell order; curve and degenerate cells become passthrough.
    std::vector<SurfacePrimitive> surfaces;
    std::vector<std::vector<Vec3>> surface_points;
    std::vector<double> surface_rms;
    std::vector<CurveRecord> cell_curves;
    std::vector<std::uint8_t> passthrough(nc, 0);
    for (int c = 0; c < nc; ++c) {
        const CellFit& cf = res.fits[c];
        switch (cf.kind) {
            case CellFit::Kind::Surface: {
                SurfacePrimitive s = cf.fit.surface();
                canonicalize(s);
                surfaces.push_back(s);
                surface_points.push_back(topo_subsample(res.cell_points.points[c], kTopoCap));
                surface_rms.push_back(cf.fit.rms);
                res.surface_cell.push_back(c);
                break;
            }
            case CellFit::Kind::Multi: {
                for (const FitResult& m : cf.multi) {
                    if (!m.is_surface()) continue;
                    SurfacePrimitive s = m.surface();
                    canonicalize(s);
                    surfaces.push_back(s);
                    surface_points.push_back(topo_subsample(res.cell_points.points[c], kTopoCap));
                    surface_rms.push_back(m.rms);
                    res.surface_cell.push_back(c);
                }
                break;
            }
            case CellFit::Kind::Curve: {
                CurveRecord rec;
                rec.prim = cf.fit.curve();
                canonicalize(rec.prim);
                rec.rms = cf.fit.rms;
                rec.points = topo_subsample(res.cell_points.points[c], kTopoCap);
                cell_curves.push_back(std::move(rec));
                passthrough[c] = 1;
                break;
            }
            case CellFit::Kind::Degenerate:
                passthrough[c] = 1;
                break;
        }
    }
    if (surfaces.empty()) throw NoModelFound("no cell produced a surface");

    // Deduplicate near-identical surfaces: a thin sliver cell (e.g. along a
    // rim) can fit the same surface as its large neighbor. Two surfaces are
    // duplicates when each one's supporting points lie within 10*eps1 RMS of
    // the other surface; the lower-rms fit survives and the points pool.
    {
        auto rms_to = [](const SurfacePrimitive& s, const std::vector<Vec3>& pts) {
            if (pts.empty()) return std::numeric_limits<double>::infinity();
            double acc = 0;
            for (const Vec3& p : pts) {
                const double d = distance(s, p);
                acc += d * d;
            }
            return std::sqrt(acc / double(pts.size()));
        };
        const double tol = 10.0 * cfg.eps1;
        std::vector<char> dead(surfaces.size(), 0);
        for (std::size_t i = 0; i < surfaces.size(); ++i) {
            if (dead[i]) continue;
            for (std::size_t j = i + 1; j < surfaces.size(); ++j) {
                if (dead[j]) continue;
                if (rms_to(surfaces[j], surface_points[i]) >= tol ||
                    rms_to(surfaces[i], surface_points[j]) >= tol)
                    continue;
                if (surface_rms[j] < surface_rms[i]) {
                    surfaces[i] = surfaces[j];
                    surface_rms[i] = surface_rms[j];
                    res.surface_cell[i] = res.surface_cell[j];
                }
                surface_points[i].insert(surface_points[i].end(),
                                         surface_points[j].begin(),
                                         surface_points[j].end());
                surface_points[i] = topo_subsample(surface_points[i], kTopoCap);
                dead[j] = 1;
            }
        }
        std::size_t keep = 0;
        for (std::size_t i = 0; i < surfaces.size(); ++i) {
            if (dead[i]) continue;
            if (keep != i) {
                surfaces[keep] = surfaces[i];
                surface_points[keep] = std::move(surface_points[i]);
                res.surface_cell[keep] = res.surface_cell[i];
            }
            ++keep;
        }
        surfaces.resize(keep);
        surface_points.resize(keep);
        res.surface_cell.resize(keep);
    }

    BoolMatrix FF = build_surface_adjacency(res.cells.adjacency, res.surface_cell,
                                            passthrough, surface_points, cfg.eps2);
    CurveExtraction cx =
        extract_curves(surfaces, FF, surface_points, cell_curves, cfg);
    BoolMatrix EE = build_curve_adjacency(cx.FE, cx.curves, cfg.eps3);
    VertexExtraction vx = extract_vertices(cx.curves, EE, cx.FE, cfg.eps3);
    sort_vertices(vx.vertices, vx.EV, vx.FV);

    std::vector<CurvePrimitive> curve_prims;
    for (CurveRecord& rec : cx.curves) {
        canonicalize(rec.prim);
        curve_prims.push_back(rec.prim);
    }
    AssembledBRep assembled =
        assemble_brep(vx.vertices, curve_prims, surfaces, FF, cx.FE, EE, vx.EV,
                      vx.FV, cfg.eps3);
    res.brep.model = std::move(assembled.model);
    res.brep.warnings = std::move(assembled.warnings);
    res.brep.config = cfg;
    return res;
}

PipelineResult run_pipeline(const PipelineManifest& manifest) {
    const Config& cfg = manifest.config;
    std::optional<UdfGrid> udf;
    std::optional<std::vector<Vec3>> points;
    std::optional<BoundaryGrid> boundary;
    Normalization norm;

    if (!manifest.points_path.empty()) {
        points = read_points(manifest.points_path).points;
    }
    switch (manifest.kind) {
        case InputKind::Points: {
            std::vector<Vec3> input = read_points(manifest.input_path).points;
            if (input.empty()) throw EmptyInput("input point file is empty");
            if (manifest.normalize) {
                norm = Normalization::from_points(input);
                for (Vec3& p : input) p = norm.to_unit(p);
            }
            udf = udf_from_points(input, cfg);
            if (!points) points = std::move(input);
            break;
        }
        case InputKind::UdfGrid: {
            udf = read_nvdu(manifest.input_path);
            if (udf->r() != cfg.r) {
                throw ResolutionMismatch("UDF resolution disagrees with config");
            }
            break;
        }
        case InputKind::Labels: {
            const LabelGrid labels = read_nvdl(manifest.input_path);
            if (labels.r() != cfg.r) {
                throw ResolutionMismatch("label resolution disagrees with config");
            }
            boundary = boundary_from_labels(labels);
            break;
        }
    }

    if (!boundary) {
        if (manifest.analytic_detector) {
            DetectorParams params;
            params.tau = cfg.detect_tau();
            const PatchSpec spec =
                PatchSpec::cover(cfg.r, cfg.patch_stride, cfg.patch_size);
            boundary = tile_and_merge(*udf, spec, [&](const UdfGrid& patch) {
                return detect_analytic(patch, params, cfg.threads, true).p;
            });
        } else {
            boundary =
                ingest_external(read_nvdb(manifest.external_boundary).p, cfg.r);
        }
    }

    PipelineResult res =
        run_stages(std::move(udf), std::move(*boundary), std::move(points), cfg);
    if (manifest.normalize) {
        res.brep.model = denormalize(res.brep.model, norm);
    }
    if (!manifest.output_dir.empty()) {
        write_stage_artifacts(res, manifest.output_dir);
    }
    return res;
}

void write_stage_artifacts(const PipelineResult& result,
                           const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    if (result.udf) write_nvdu(dir / "udf.nvdu", *result.udf);
    write_nvdb(dir / "boundary_raw.nvdb", result.raw_boundary);
    write_nvdb(dir / "boundary.nvdb", result.boundary);
    LabelGrid cells(result.boundary.p.geom);
    for (std::int64_t i = 0; i < cells.size(); ++i) {
        cells.at(i) = result.cells.cell_of.at(i);
    }
    write_nvdl(dir / "cells.nvdl", cells);
    write_brep_json(dir / "brep.json", result.brep);
}

}  // namespace splitfit
