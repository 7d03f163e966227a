#include "pbs/renderer.hpp"

#include <cmath>
#include <limits>

#include "pbs/raster_core.hpp"

namespace pbs {

FrameBuffer::FrameBuffer(int w, int h, Rgba8 background) : width(w), height(h) { clear(background); }

void FrameBuffer::clear(Rgba8 background) {
  const auto n = static_cast<std::size_t>(width) * height;
  color.assign(n, background);
  depth.assign(n, std::numeric_limits<float>::infinity());
  tag.assign(n, std::numeric_limits<std::uint64_t>::max());
}

bool FrameBuffer::painted(std::size_t i) const { return depth[i] != std::numeric_limits<float>::infinity(); }

std::size_t FrameBuffer::painted_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < depth.size(); ++i) n += painted(i);
  return n;
}

RgbImage FrameBuffer::to_image() const {
  RgbImage img(width, height);
  for (std::size_t i = 0; i < color.size(); ++i)
    for (int c = 0; c < 3; ++c) img.data[i * 3 + c] = color[i][c] / 255.0f;
  return img;
}

RgbImage FrameBuffer::mask_image() const {
  RgbImage img(width, height);
  for (std::size_t i = 0; i < depth.size(); ++i)
    if (painted(i)) img.data[i * 3] = img.data[i * 3 + 1] = img.data[i * 3 + 2] = 1.0f;
  return img;
}

namespace {

struct ClipVertex {
  Vec3d world;
  double depth;
  Rgba color;
};

ClipVertex lerp(const ClipVertex& a, const ClipVertex& b, double t) {
  auto mix = [t](float x, float y) { return static_cast<float>(x + (y - x) * t); };
  return {a.world + (b.world - a.world) * t, a.depth + (b.depth - a.depth) * t,
          {mix(a.color.r, b.color.r), mix(a.color.g, b.color.g), mix(a.color.b, b.color.b),
           mix(a.color.a, b.color.a)}};
}

}  // namespace

std::uint64_t draw_mesh(const TriangleMesh& mesh, const Mat4& local_to_world, const ViewProjection& view,
                        double near_plane, FrameBuffer& fb, std::uint64_t tag_base) {
  const bool persp = view.kind == ViewProjection::Kind::Perspective;
  std::vector<ClipVertex> verts(mesh.vertices.size());
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const Vec3d w = local_to_world.transform_point(Vec3d(mesh.vertices[i].position));
    verts[i] = {w, dot(w - view.eye, view.forward), mesh.vertices[i].color};
  }

  std::uint64_t drawn = 0;
  std::vector<ClipVertex> poly, clipped;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    poly = {verts[tri[0]], verts[tri[1]], verts[tri[2]]};
    const double limit = persp ? near_plane : -std::numeric_limits<double>::infinity();
    int inside = 0;
    for (const auto& v : poly) inside += v.depth >= limit;
    if (inside == 0) continue;
    if (inside < 3) {
      clipped.clear();
      for (std::size_t i = 0; i < 3; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % 3];
        const bool ain = a.depth >= limit, bin = b.depth >= limit;
        if (ain) clipped.push_back(a);
        if (ain != bin) clipped.push_back(lerp(a, b, (limit - a.depth) / (b.depth - a.depth)));
      }
      poly.swap(clipped);
    }
    ++drawn;
    const std::uint64_t key = tag_base + t;
    auto screen = [&](const ClipVertex& v) {
      const auto p = view.project(v.world);
      return ScreenVertex{p.x, p.y, p.depth, persp ? 1.0 / p.depth : 1.0};
    };
    const ScreenVertex s0 = screen(poly[0]);
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
      const ClipVertex& a = poly[0];
      const ClipVertex& b = poly[i];
      const ClipVertex& c = poly[i + 1];
      rasterize_triangle(s0, screen(b), screen(c), fb.width, fb.height,
                         [&](int px, int py, double depth, double l0, double l1, double l2) {
                           auto mix = [&](float x, float y, float z) {
                             return static_cast<float>(x * l0 + y * l1 + z * l2);
                           };
                           const Rgba col{mix(a.color.r, b.color.r, c.color.r), mix(a.color.g, b.color.g, c.color.g),
                                          mix(a.color.b, b.color.b, c.color.b), 1.0f};
                           fb.test_and_write(fb.index(px, py), static_cast<float>(depth), key, to_rgba8(col));
                         });
    }
  }
  return drawn;
}

std::uint64_t splat_surfels(const SurfelCloud& cloud, std::uint64_t prefix, double s, double radius,
                            const Mat4& local_to_world, const ViewProjection& view, FrameBuffer& fb,
                            std::uint64_t tag_base) {
  const std::uint64_t n = std::min<std::uint64_t>(prefix, cloud.size());
  if (n == 0 || !(radius > 0)) return 0;
  const Mat4 world_to_local = local_to_world.affine_inverse();
  for (std::uint64_t i = 0; i < n; ++i) {
    const Surfel& sf = cloud.surfels[i];
    const Vec3d center(sf.position);
    const float d = static_cast<float>(view.project(local_to_world.transform_point(center)).depth);
    const std::uint64_t key = tag_base + i;
    splat_disc(view, local_to_world, world_to_local, center, Vec3d(sf.normal), radius, s,
               [&](int px, int py, double, const Vec3d&) { fb.test_and_write(fb.index(px, py), d, key, sf.color); });
  }
  return n;
}

RenderStats render_frame(const Scene& scene, const std::vector<RenderAction>& actions, const CameraModel& camera,
                         FrameBuffer& fb) {
  fb.clear();
  const ViewProjection view = camera.view();
  RenderStats st;
  for (std::size_t a = 0; a < actions.size(); ++a) {
    const auto& act = actions[a];
    if (act.kind == RenderAction::Kind::Skip) continue;
    const SceneNode& n = scene.node(act.node);
    const std::uint64_t base = std::uint64_t(a) << 32;
    // Only actions that submit primitives count as draws.
    if (act.kind == RenderAction::Kind::Geometry) {
      if (!n.mesh) continue;
      st.triangles += draw_mesh(*n.mesh, n.transform, view, camera.near_plane, fb, base);
      ++st.actions;
    } else if (n.lod && act.prefix > 0) {
      st.surfels += splat_surfels(*n.lod, act.prefix, act.surfel_size, act.radius, n.transform, view, fb, base);
      ++st.actions;
    }
  }
  return st;
}

}  // namespace pbs
