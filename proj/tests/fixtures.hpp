#pragma once

#include <functional>
#include <string>
#include <vector>

#include "splitfit/io.hpp"
#include "splitfit/metrics.hpp"

namespace splitfit::fixtures {

/// A synthetic scene: per-element GT sample sets (faces, then curves, then
/// vertices) and the pooled point cloud used as pipeline input.
struct Scene {
    std::string name;
    std::vector<std::vector<Vec3>> sets;
    int n_surface_sets = 0;  ///< sets[0..n_surface_sets) are the face sets
    std::vector<Vec3> surface_points;
};

// Two parallel square faces at z = 0.3 and z = 0.7.
Scene scene_two_planes(int r);

// Axis-aligned cube [0.25, 0.75]^3: 6 faces + 12 edges + 8 corners = 26 sets.
Scene scene_cube(int r);

// Capped cylinder, radius 0.2, height 0.6, axis z through (0.5, 0.5):
// lateral + 2 cap disks + 2 rim circles = 5 sets.
Scene scene_capped_cylinder(int r, double sigma = 0.0);

// Sphere (c = (0.5, 0.5, 0.45), r = 0.3) truncated by the plane z = 0.2:
// dome + base disk + rim circle = 3 sets.
Scene scene_sphere_plane(int r);

// Cone (apex (0.5, 0.5, 0.8), axis -z, half-angle 0.4) over a base disk at
// z = 0.2: lateral + disk + rim circle + apex vertex = 4 sets.
Scene scene_cone_plane(int r);

std::vector<Scene> all_scenes(int r);

/// Hand-built ground-truth models for the end-to-end checks.
BRepFile gt_cube_brep();
BRepFile gt_capped_cylinder_brep();

/// Deterministic i.i.d. Gaussian perturbation.
void add_noise(std::vector<Vec3>& pts, double sigma, std::uint64_t seed);

/// Deterministic samples of one primitive (fixture-level wrapper).
std::vector<Vec3> sampled(const SurfacePrimitive& s, double density,
                          const Eigen::AlignedBox3d& extent = unit_extent());
std::vector<Vec3> sampled(const CurvePrimitive& c, double density,
                          const Eigen::AlignedBox3d& extent = unit_extent());

}  // namespace splitfit::fixtures
