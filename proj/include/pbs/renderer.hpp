#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pbs/geometry.hpp"
#include "pbs/image.hpp"
#include "pbs/mesh.hpp"
#include "pbs/prefixmath.hpp"
#include "pbs/scene.hpp"
#include "pbs/surfel.hpp"
#include "pbs/view.hpp"

namespace pbs {

struct FrameBuffer {
  int width = 0;
  int height = 0;
  std::vector<Rgba8> color;
  std::vector<float> depth;        // +inf where nothing was drawn
  std::vector<std::uint64_t> tag;  // draw order key used to break depth ties

  FrameBuffer() = default;
  FrameBuffer(int w, int h, Rgba8 background = {0, 0, 0, 255});

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  void clear(Rgba8 background = {0, 0, 0, 255});
  bool painted(std::size_t i) const;
  std::size_t painted_count() const;

  /// Depth test with ties going to the lower tag.
  bool test_and_write(std::size_t i, float d, std::uint64_t key, const Rgba8& c) {
    if (d < depth[i] || (d == depth[i] && key < tag[i])) {
      depth[i] = d;
      tag[i] = key;
      color[i] = c;
      return true;
    }
    return false;
  }

  RgbImage to_image() const;
  /// 1 where painted, 0 elsewhere.
  RgbImage mask_image() const;
};

struct RenderStats {
  std::size_t actions = 0;  // actions that submitted primitives (draw-call equivalents)
  std::uint64_t triangles = 0;
  std::uint64_t surfels = 0;
};

/// Draws a mesh with perspective-correct color interpolation, clipping at
/// the camera's near plane. Tags are `tag_base + triangle index`.
std::uint64_t draw_mesh(const TriangleMesh& mesh, const Mat4& local_to_world, const ViewProjection& view,
                        double near_plane, FrameBuffer& fb, std::uint64_t tag_base = 0);

/// Draws the first `prefix` surfels as opaque discs of node-local radius
/// `radius`, each covering at most an s x s pixel square around its projected
/// center. All fragments of a disc use the center's depth; ties go to the
/// lower surfel index. Returns the number of surfels drawn.
std::uint64_t splat_surfels(const SurfelCloud& cloud, std::uint64_t prefix, double s, double radius,
                            const Mat4& local_to_world, const ViewProjection& view, FrameBuffer& fb,
                            std::uint64_t tag_base = 0);

/// Composes all actions into `fb` (cleared first).
RenderStats render_frame(const Scene& scene, const std::vector<RenderAction>& actions, const CameraModel& camera,
                         FrameBuffer& fb);

}  // namespace pbs
