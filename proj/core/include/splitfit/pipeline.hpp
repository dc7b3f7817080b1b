#pragma once

#include <optional>
#include <vector>

#include "splitfit/cells.hpp"
#include "splitfit/fitting.hpp"
#include "splitfit/io.hpp"
#include "splitfit/topology.hpp"

namespace splitfit {

/// Everything a pipeline run produces, stage by stage.
struct PipelineResult {
    std::optional<UdfGrid> udf;
    BoundaryGrid raw_boundary;
    BoundaryGrid boundary;  // after hole filling
    VoronoiCells cells;
    CellPoints cell_points;
    std::vector<CellFit> fits;       // one per cell
    std::vector<int> surface_cell;   // owning cell per output surface
    BRepFile brep;
};

/// Reconstruction from a boundary grid onward: hole filling (when a UDF is
/// available), region growing, point assignment, per-cell fitting, topology
/// recovery, and model assembly. Deterministic for a fixed config regardless
/// of the thread count.
PipelineResult run_stages(std::optional<UdfGrid> udf, BoundaryGrid boundary,
                          std::optional<std::vector<Vec3>> input_points,
                          const Config& cfg);

/// Full manifest-driven run: input loading, boundary detection or ingestion,
/// then run_stages. With normalize set, points are mapped into the unit box
/// and the output model is mapped back.
PipelineResult run_pipeline(const PipelineManifest& manifest);

/// Write per-stage grids plus brep.json into the directory (created if
/// needed).
void write_stage_artifacts(const PipelineResult& result,
                           const std::filesystem::path& dir);

/// Map a model fitted in the unit box back to the original frame.
BRepModel denormalize(const BRepModel& model, const Normalization& n);

}  // namespace splitfit
