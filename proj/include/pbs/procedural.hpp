#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "pbs/mesh.hpp"
#include "pbs/scene.hpp"

namespace pbs {

/// Torus around the y axis with 2 * segments_u * segments_v triangles and a
/// banded color pattern. 132 x 132 segments give 34848 triangles.
TriangleMesh make_torus(double major_radius = 1.0, double minor_radius = 0.35, int segments_u = 132,
                        int segments_v = 132);

TriangleMesh make_uv_sphere(double radius = 1.0, int segments = 32, int rings = 16, Rgba color = {0.8f, 0.3f, 0.2f, 1});

/// Axis-aligned box with outward faces, 12 triangles, one color per face.
TriangleMesh make_box(const Vec3d& lo = {-0.5, -0.5, -0.5}, const Vec3d& hi = {0.5, 0.5, 0.5});

/// Unit quad in the xy plane facing +z, two triangles.
TriangleMesh make_quad(double size = 1.0, Rgba color = {0.2f, 0.6f, 0.9f, 1});

/// Flat ground grid in the xz plane facing +y with a checker color pattern.
TriangleMesh make_ground(double size, int cells);

/// Single-node scene of one mesh.
Scene make_single_mesh_scene(std::shared_ptr<const TriangleMesh> mesh, const Mat4& transform = Mat4::identity());

/// nx x nz instances of `mesh` on the xz plane (seeded jitter in rotation
/// and scale), organized by the loose octree, optionally with a ground plane.
Scene make_grid_scene(std::shared_ptr<const TriangleMesh> mesh, int nx, int nz, double spacing, std::uint64_t seed,
                      bool ground = true);

/// Named procedural scenes used by tests, benchmarks and the CLI:
/// "torus", "sphere", "cube", "grid" (8 x 8 tori), "city" (16 x 16 tori).
Scene make_named_scene(const std::string& name, std::uint64_t seed = 1);

}  // namespace pbs
