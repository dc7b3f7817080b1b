#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "splitfit/brep.hpp"
#include "splitfit/config.hpp"
#include "splitfit/metrics.hpp"
#include "splitfit/udf.hpp"

namespace splitfit {

// --- binary voxel grids --------------------------------------------------
// All little-endian, x-fastest index order.
// NVDU: "NVDU", u32 version=1, u32 r, 3xf64 origin, f64 spacing,
//       r^3 x (f32 d, f32 gx, f32 gy, f32 gz)
// NVDB: "NVDB", u32 version=1, u32 r, r^3 x f32 probability
// NVDL: "NVDL", u32 version=1, u32 r, r^3 x u32 label

void write_nvdu(const std::filesystem::path& path, const UdfGrid& udf);
UdfGrid read_nvdu(const std::filesystem::path& path);

void write_nvdb(const std::filesystem::path& path, const BoundaryGrid& b);
BoundaryGrid read_nvdb(const std::filesystem::path& path);

void write_nvdl(const std::filesystem::path& path, const LabelGrid& labels);
LabelGrid read_nvdl(const std::filesystem::path& path);

// --- ASCII point files ---------------------------------------------------
// One point per line: "x y z" or "x y z nx ny nz"; '#' starts a comment.

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;  // empty, or one per point

    bool has_normals() const { return !normals.empty(); }
};

PointCloud read_points(const std::filesystem::path& path);
void write_points(const std::filesystem::path& path, const PointCloud& pc);

/// Point-sample OBJ (v-records only), for visual spot checks.
void write_obj_points(const std::filesystem::path& path,
                      const std::vector<Vec3>& points);

// --- brep.json -----------------------------------------------------------

struct BRepFile {
    BRepModel model;
    std::vector<std::string> warnings;
    Config config;
};

std::string brep_to_json(const BRepFile& f);
BRepFile brep_from_json(const std::string& text);
void write_brep_json(const std::filesystem::path& path, const BRepFile& f);
BRepFile read_brep_json(const std::filesystem::path& path);

// --- evaluation JSON -----------------------------------------------------

struct EvalReport {
    DetectionResult detection;
    TopoScores topo;
    // Pooled per-class Chamfer distance; negative when a side is empty.
    double cd_surface = -1, cd_curve = -1, cd_vertex = -1;
};

std::string eval_to_json(const EvalReport& rep);
void write_eval_json(const std::filesystem::path& path, const EvalReport& rep);

// --- manifests -----------------------------------------------------------

enum class InputKind { Points, Labels, UdfGrid };

/// Pipeline run description. Exactly one boundary source: the analytic
/// detector, an external NVDB file, or (for label inputs) the labels
/// themselves.
struct PipelineManifest {
    std::filesystem::path input_path;
    InputKind kind = InputKind::Points;
    bool analytic_detector = true;
    std::filesystem::path external_boundary;  // NVDB, when not analytic
    std::filesystem::path points_path;        // optional extra fit points
    std::filesystem::path output_dir;
    bool normalize = false;
    Config config;
};

PipelineManifest read_manifest(const std::filesystem::path& path);

/// GT-generation description: per-primitive sample sets, either sampled from
/// tagged primitive records (with optional extent box and density) or loaded
/// from point files. Paths are resolved relative to the manifest.
struct GtManifest {
    Config config;
    std::vector<std::vector<Vec3>> sets;
};

GtManifest read_gt_manifest(const std::filesystem::path& path);

}  // namespace splitfit
