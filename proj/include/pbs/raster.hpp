#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pbs/geometry.hpp"
#include "pbs/scene.hpp"
#include "pbs/surfel.hpp"
#include "pbs/view.hpp"

namespace pbs {

/// Multi-target capture buffer for one direction. Attribute channels are
/// meaningful only where `covered` is set. Positions and normals are in the
/// captured node's local frame; depth is measured along the view direction.
struct GBuffer {
  int width = 0;
  int height = 0;
  ViewProjection view;  // node-local orthographic view used for the capture
  std::vector<std::uint8_t> covered;
  std::vector<Vec3f> position;
  std::vector<Vec3f> normal;
  std::vector<Rgba> color;
  std::vector<float> depth;

  GBuffer() = default;
  GBuffer(int w, int h);

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  std::size_t covered_count() const;
  bool operator==(const GBuffer& o) const;
};

using GBufferSet = std::vector<GBuffer>;

struct CaptureConfig {
  std::uint32_t resolution = 1024;
  /// Unit view directions in the node's local frame. Empty means the eight
  /// bounding-box corners looking at the box center.
  std::vector<Vec3d> directions;
  bool cull_backfaces = true;
};

/// Where capture takes a descendant's surface from.
enum class CaptureSource {
  Geometry,        // always the original triangles
  ChildSurfelLods  // descendants that already carry a LOD contribute their surfel discs
};

/// Directions from the eight corners of `box` toward its center.
std::vector<Vec3d> corner_directions(const Box3& box);

/// Tight box of the node's subtree geometry expressed in the node's local frame.
Box3 node_bounds_local(const Scene& scene, NodeId id);

/// Orthographic view looking along `direction` whose square image rectangle
/// is fitted to the projection of `local_bounds`.
ViewProjection fit_capture_view(const Box3& local_bounds, const Vec3d& direction, std::uint32_t resolution);

GBuffer rasterize_direction(const Scene& scene, NodeId node, const Vec3d& direction,
                            const CaptureConfig& config,
                            CaptureSource source = CaptureSource::Geometry);

GBufferSet capture_gbuffers(const Scene& scene, NodeId node, const CaptureConfig& config,
                            CaptureSource source = CaptureSource::Geometry);

/// World radius at which a full cloud covers its surface: r_m * sqrt(p_m / size).
double full_cloud_radius(const SurfelCloud& cloud);

enum class GBufferChannel { Coverage, Position, Normal, Color, Depth };

/// Writes one channel as an 8-bit RGB image (PNG or PPM chosen by extension).
void write_gbuffer_channel(const GBuffer& buffer, GBufferChannel channel, const std::filesystem::path& path);

}  // namespace pbs
