#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "splitfit/boundary.hpp"
#include "splitfit/gt_voronoi.hpp"
#include "splitfit/pipeline.hpp"

namespace fs = std::filesystem;
using namespace splitfit;

namespace {

struct ConfigFlags {
    std::optional<int> resolution, threads, patch_stride, patch_size;
    std::optional<double> eps1, eps2, eps3, tau;
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* app) {
        app->add_option("--resolution", resolution, "Grid resolution (voxels per axis)");
        app->add_option("--eps1", eps1, "Fitting threshold");
        app->add_option("--eps2", eps2, "Surface-adjacency threshold");
        app->add_option("--eps3", eps3, "Curve-adjacency threshold");
        app->add_option("--tau", tau, "Detector threshold (0 = auto)");
        app->add_option("--threads", threads, "Worker threads (0 = hardware)");
        app->add_option("--seed", seed, "RANSAC base seed");
        app->add_option("--patch-stride", patch_stride, "Detector tiling stride");
        app->add_option("--patch-size", patch_size, "Detector tiling patch size");
    }

    Config apply(Config cfg) const {
        if (resolution) cfg.r = *resolution;
        if (eps1) cfg.eps1 = *eps1;
        if (eps2) cfg.eps2 = *eps2;
        if (eps3) cfg.eps3 = *eps3;
        if (tau) cfg.tau = *tau;
        if (threads) cfg.threads = *threads;
        if (seed) cfg.seed = *seed;
        if (patch_stride) cfg.patch_stride = *patch_stride;
        if (patch_size) cfg.patch_size = *patch_size;
        if (!cfg.valid()) throw ValueOutOfRange("flag combination violates config invariants");
        return cfg;
    }
};

int cmd_udf(const std::string& input, const std::string& output, const Config& cfg,
            bool normalize) {
    std::vector<Vec3> pts = read_points(input).points;
    if (pts.empty()) throw EmptyInput("no points in " + input);
    if (normalize) {
        const Normalization n = Normalization::from_points(pts);
        for (Vec3& p : pts) p = n.to_unit(p);
    }
    write_nvdu(output, udf_from_points(pts, cfg));
    std::cout << "wrote " << output << " (r=" << cfg.r << ", " << pts.size()
              << " points)\n";
    return 0;
}

int cmd_gt(const std::string& manifest, const std::string& labels_out,
           const std::string& boundary_out, const ConfigFlags& flags) {
    GtManifest m = read_gt_manifest(manifest);
    const Config cfg = flags.apply(m.config);
    auto [udf, labels] = udf_from_primitive_samples(m.sets, cfg);
    (void)udf;
    const BoundaryGrid boundary = boundary_from_labels(labels);
    if (!labels_out.empty()) write_nvdl(labels_out, labels);
    if (!boundary_out.empty()) write_nvdb(boundary_out, boundary);
    std::int64_t flagged = 0;
    for (std::int64_t i = 0; i < boundary.p.size(); ++i) flagged += boundary.flag(i);
    std::cout << "gt: " << m.sets.size() << " sets, " << flagged
              << " boundary voxels\n";
    return 0;
}

int cmd_detect(const std::string& input, const std::string& output,
               const Config& cfg, bool whole_grid) {
    const UdfGrid udf = read_nvdu(input);
    Config c = cfg;
    c.r = udf.r();
    DetectorParams params;
    params.tau = c.detect_tau();
    BoundaryGrid boundary;
    if (whole_grid) {
        boundary = detect_analytic(udf, params, c.threads);
    } else {
        const PatchSpec spec = PatchSpec::cover(c.r, c.patch_stride, c.patch_size);
        boundary = tile_and_merge(udf, spec, [&](const UdfGrid& patch) {
            return detect_analytic(patch, params, c.threads, true).p;
        });
    }
    write_nvdb(output, boundary);
    std::int64_t flagged = 0;
    for (std::int64_t i = 0; i < boundary.p.size(); ++i) flagged += boundary.flag(i);
    std::cout << "detect: " << flagged << " flagged voxels -> " << output << "\n";
    return 0;
}

int cmd_cells(const std::string& boundary_in, const std::string& udf_in,
              const std::string& output) {
    BoundaryGrid boundary = read_nvdb(boundary_in);
    if (!udf_in.empty()) {
        const UdfGrid udf = read_nvdu(udf_in);
        boundary = fill_holes(boundary, udf);
    }
    const VoronoiCells cells = grow_regions(boundary);
    LabelGrid labels(boundary.p.geom);
    for (std::int64_t i = 0; i < labels.size(); ++i) {
        labels.at(i) = cells.cell_of.at(i);
    }
    write_nvdl(output, labels);
    std::cout << "cells: " << cells.n_cells << " cells -> " << output << "\n";
    return 0;
}

int cmd_fit(const std::string& input, const std::string& output, const Config& cfg) {
    const std::vector<Vec3> pts = read_points(input).points;
    const CellFit cf = fit_cell(pts, cfg.eps1, cfg.seed);
    BRepFile file;
    file.config = cfg;
    auto add = [&](const FitResult& fr) {
        if (fr.is_surface()) {
            SurfacePrimitive s = fr.surface();
            canonicalize(s);
            file.model.surfaces.push_back(s);
        } else {
            CurvePrimitive c = fr.curve();
            canonicalize(c);
            file.model.curves.push_back(c);
        }
    };
    switch (cf.kind) {
        case CellFit::Kind::Surface:
        case CellFit::Kind::Curve:
            add(cf.fit);
            break;
        case CellFit::Kind::Multi:
            for (const FitResult& m : cf.multi) add(m);
            break;
        case CellFit::Kind::Degenerate:
            std::cout << "fit: degenerate point set\n";
            break;
    }
    const int nf = file.model.n_surfaces(), ne = file.model.n_curves();
    file.model.FF = BoolMatrix(nf, nf);
    file.model.FE = BoolMatrix(nf, ne);
    file.model.EE = BoolMatrix(ne, ne);
    file.model.EV = BoolMatrix(ne, 0);
    file.model.FV = BoolMatrix(nf, 0);
    if (!output.empty()) write_brep_json(output, file);
    for (const SurfacePrimitive& s : file.model.surfaces) {
        std::cout << "  surface " << kind_name(surface_kind(s))
                  << " rms=" << rms_distance(s, pts) << "\n";
    }
    for (const CurvePrimitive& c : file.model.curves) {
        std::cout << "  curve " << kind_name(curve_kind(c))
                  << " rms=" << rms_distance(c, pts) << "\n";
    }
    return 0;
}

int cmd_pipeline(const std::string& manifest_path, const std::string& output_dir,
                 const std::string& obj_out, const ConfigFlags& flags) {
    PipelineManifest manifest = read_manifest(manifest_path);
    manifest.config = flags.apply(manifest.config);
    if (!output_dir.empty()) manifest.output_dir = output_dir;
    const PipelineResult res = run_pipeline(manifest);
    const BRepModel& m = res.brep.model;
    std::cout << "pipeline: " << m.n_surfaces() << " surfaces, " << m.n_curves()
              << " curves, " << m.n_vertices() << " vertices\n";
    if (!obj_out.empty()) {
        std::vector<Vec3> samples;
        for (const SurfacePrimitive& s : m.surfaces) {
            try {
                const auto pts = sample_primitive(s, 2000.0);
                samples.insert(samples.end(), pts.begin(), pts.end());
            } catch (const EmptyExtent&) {
            }
        }
        write_obj_points(obj_out, samples);
    }
    for (const std::string& w : res.brep.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    return res.brep.warnings.empty() ? 0 : 2;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& output) {
    const BRepFile pred = read_brep_json(pred_path);
    const BRepFile gt = read_brep_json(gt_path);
    EvalReport rep;
    rep.detection = detection_scores(PrimitiveLists::from(pred.model),
                                     PrimitiveLists::from(gt.model),
                                     gt.config.match_thresholds);
    rep.topo = topo_f1(pred.model, gt.model, rep.detection);

    auto pooled = [](const BRepModel& m, std::vector<Vec3>& out) {
        for (const SurfacePrimitive& s : m.surfaces) {
            try {
                const auto pts = sample_primitive(s, 400.0);
                out.insert(out.end(), pts.begin(), pts.end());
            } catch (const EmptyExtent&) {
            }
        }
    };
    auto pooled_curves = [](const BRepModel& m, std::vector<Vec3>& out) {
        for (const CurvePrimitive& c : m.curves) {
            try {
                const auto pts = sample_primitive(c, 400.0);
                out.insert(out.end(), pts.begin(), pts.end());
            } catch (const EmptyExtent&) {
            }
        }
    };
    std::vector<Vec3> ps, gs, pc, gc;
    pooled(pred.model, ps);
    pooled(gt.model, gs);
    pooled_curves(pred.model, pc);
    pooled_curves(gt.model, gc);
    if (!ps.empty() && !gs.empty()) rep.cd_surface = chamfer(ps, gs);
    if (!pc.empty() && !gc.empty()) rep.cd_curve = chamfer(pc, gc);
    if (!pred.model.vertices.empty() && !gt.model.vertices.empty()) {
        rep.cd_vertex = chamfer(pred.model.vertices, gt.model.vertices);
    }
    if (!output.empty()) {
        write_eval_json(output, rep);
    } else {
        std::cout << eval_to_json(rep);
    }
    std::cout << "eval: surface F1(avg)=" << rep.detection.averaged.surface.f1
              << " FE_F1=" << rep.topo.fe_f1 << " EV_F1=" << rep.topo.ev_f1 << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Split-and-fit CAD reverse engineering pipeline"};
    app.require_subcommand(1);

    std::string input, output, manifest, labels_out, boundary_out, udf_in;
    std::string pred_path, gt_path, output_dir, obj_out;
    bool normalize = false, whole_grid = false;
    ConfigFlags flags;

    CLI::App* udf = app.add_subcommand("udf", "Build a UDF grid from a point file");
    udf->add_option("--input", input, "ASCII point file")->required();
    udf->add_option("--output", output, "Output NVDU path")->required();
    udf->add_flag("--normalize", normalize, "Map points into the unit box first");
    flags.attach(udf);

    CLI::App* gt = app.add_subcommand("gt", "Ground-truth labels and boundary from a sample manifest");
    gt->add_option("--manifest", manifest, "GT manifest (JSON)")->required();
    gt->add_option("--labels", labels_out, "Output NVDL path");
    gt->add_option("--boundary", boundary_out, "Output NVDB path");
    flags.attach(gt);

    CLI::App* detect = app.add_subcommand("detect", "Analytic boundary detection on a UDF grid");
    detect->add_option("--input", input, "Input NVDU path")->required();
    detect->add_option("--output", output, "Output NVDB path")->required();
    detect->add_flag("--whole-grid", whole_grid, "Skip the patch tiling");
    flags.attach(detect);

    CLI::App* cells = app.add_subcommand("cells", "Region growing on a boundary grid");
    cells->add_option("--boundary", input, "Input NVDB path")->required();
    cells->add_option("--udf", udf_in, "Optional NVDU for hole filling");
    cells->add_option("--output", output, "Output NVDL path")->required();
    flags.attach(cells);

    CLI::App* fit = app.add_subcommand("fit", "Fit primitives to one point set");
    fit->add_option("--input", input, "ASCII point file")->required();
    fit->add_option("--output", output, "Output brep.json path");
    flags.attach(fit);

    CLI::App* pipeline = app.add_subcommand("pipeline", "Full reconstruction from a manifest");
    pipeline->add_option("--manifest", manifest, "Pipeline manifest (JSON)")->required();
    pipeline->add_option("--output-dir", output_dir, "Override the manifest output directory");
    pipeline->add_option("--obj", obj_out, "Point-sample OBJ spot-check export");
    flags.attach(pipeline);

    CLI::App* eval = app.add_subcommand("eval", "Score a reconstruction against ground truth");
    eval->add_option("--pred", pred_path, "Predicted brep.json")->required();
    eval->add_option("--gt", gt_path, "Ground-truth brep.json")->required();
    eval->add_option("--output", output, "Output evaluation JSON");
    flags.attach(eval);

    CLI11_PARSE(app, argc, argv);

    try {
        if (udf->parsed()) return cmd_udf(input, output, flags.apply({}), normalize);
        if (gt->parsed()) return cmd_gt(manifest, labels_out, boundary_out, flags);
        if (detect->parsed()) return cmd_detect(input, output, flags.apply({}), whole_grid);
        if (cells->parsed()) return cmd_cells(input, udf_in, output);
        if (fit->parsed()) return cmd_fit(input, output, flags.apply({}));
        if (pipeline->parsed()) return cmd_pipeline(manifest, output_dir, obj_out, flags);
        if (eval->parsed()) return cmd_eval(pred_path, gt_path, output);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const MalformedFile& e) {
        std::cerr << "malformed file: " << e.what() << "\n";
        return 1;
    } catch (const SchemaMismatch& e) {
        std::cerr << "schema mismatch: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
