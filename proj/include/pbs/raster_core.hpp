#pragma once

#include <algorithm>
#include <cmath>

#include "pbs/geometry.hpp"
#include "pbs/view.hpp"

namespace pbs {

/// Screen-space triangle vertex. `inv_w` is 1/depth for perspective views
/// and 1 for orthographic ones; it drives perspective-correct interpolation.
struct ScreenVertex {
  double x = 0, y = 0;
  double depth = 0;
  double inv_w = 1;
};

/// Scan-converts one triangle over a width x height pixel grid, sampling at
/// pixel centers. Pixels exactly on an edge are claimed by exactly one of two
/// triangles sharing that edge (top-left style tie rule). For every covered
/// pixel calls `fragment(px, py, depth, b0, b1, b2)` with perspective-correct
/// barycentrics. Winding is irrelevant here; culling is the caller's job.
template <typename Fragment>
void rasterize_triangle(ScreenVertex a, ScreenVertex b, ScreenVertex c, int width, int height,
                        Fragment&& fragment) {
  auto edge = [](const ScreenVertex& p, const ScreenVertex& q, double x, double y) {
    return (q.x - p.x) * (y - p.y) - (q.y - p.y) * (x - p.x);
  };
  double area = edge(a, b, c.x, c.y);
  if (!(std::abs(area) > 0.0) || !std::isfinite(area)) return;
  const bool swapped = area < 0;
  if (swapped) {
    std::swap(b, c);
    area = -area;
  }
  // Tie rule for a directed edge p->q under positive orientation.
  auto owns = [](const ScreenVertex& p, const ScreenVertex& q) {
    const double dy = q.y - p.y, dx = q.x - p.x;
    return dy > 0 || (dy == 0 && dx < 0);
  };
  const bool own0 = owns(b, c), own1 = owns(c, a), own2 = owns(a, b);

  const double minx = std::min({a.x, b.x, c.x}), maxx = std::max({a.x, b.x, c.x});
  const double miny = std::min({a.y, b.y, c.y}), maxy = std::max({a.y, b.y, c.y});
  const int x0 = std::max(0, static_cast<int>(std::floor(minx - 0.5)));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(maxx - 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::floor(miny - 0.5)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(maxy - 0.5)));
  if (x0 > x1 || y0 > y1) return;

  const double inv_area = 1.0 / area;
  for (int py = y0; py <= y1; ++py) {
    const double sy = py + 0.5;
    for (int px = x0; px <= x1; ++px) {
      const double sx = px + 0.5;
      const double w0 = edge(b, c, sx, sy);
      const double w1 = edge(c, a, sx, sy);
      const double w2 = edge(a, b, sx, sy);
      if (w0 < 0 || w1 < 0 || w2 < 0) continue;
      if ((w0 == 0 && !own0) || (w1 == 0 && !own1) || (w2 == 0 && !own2)) continue;
      double l0 = w0 * inv_area, l1 = w1 * inv_area, l2 = w2 * inv_area;
      // Perspective correction; a no-op when all inv_w are equal.
      const double q0 = l0 * a.inv_w, q1 = l1 * b.inv_w, q2 = l2 * c.inv_w;
      const double qs = q0 + q1 + q2;
      double depth;
      if (a.inv_w == 1.0 && b.inv_w == 1.0 && c.inv_w == 1.0) {
        depth = l0 * a.depth + l1 * b.depth + l2 * c.depth;
      } else {
        l0 = q0 / qs;
        l1 = q1 / qs;
        l2 = q2 / qs;
        depth = 1.0 / qs;
      }
      if (swapped) std::swap(l1, l2);
      fragment(px, py, depth, l0, l1, l2);
    }
  }
}

/// Oriented disc splat. Covers the screen-aligned square of side `square_px`
/// centered on the projected disc center, casts each pixel's ray into the
/// disc's frame via `world_to_local`, intersects it with the disc plane and
/// keeps fragments within `radius` of the center (all in that frame). Calls
/// `fragment(px, py, hit_depth, hit_local)` where hit_depth is the view
/// depth of the plane intersection. Edge-on discs produce no fragments.
template <typename Fragment>
void splat_disc(const ViewProjection& view, const Mat4& local_to_world, const Mat4& world_to_local,
                const Vec3d& center, const Vec3d& normal, double radius, double square_px,
                Fragment&& fragment) {
  const Vec3d center_world = local_to_world.transform_point(center);
  const auto proj = view.project(center_world);
  if (!(proj.depth > 0) || !std::isfinite(proj.x) || !std::isfinite(proj.y)) return;
  const double half = 0.5 * square_px;
  // Pixel i is inside when its center lies in [cx - half, cx + half).
  const int x0 = std::max(0, static_cast<int>(std::ceil(proj.x - half - 0.5)));
  const int x1 = std::min(view.width - 1, static_cast<int>(std::ceil(proj.x + half - 0.5)) - 1);
  const int y0 = std::max(0, static_cast<int>(std::ceil(proj.y - half - 0.5)));
  const int y1 = std::min(view.height - 1, static_cast<int>(std::ceil(proj.y + half - 0.5)) - 1);
  const double r2 = radius * radius;
  for (int py = y0; py <= y1; ++py)
    for (int px = x0; px <= x1; ++px) {
      const auto ray = view.ray(px + 0.5, py + 0.5);
      const Vec3d o = world_to_local.transform_point(ray.origin);
      const Vec3d d = world_to_local.transform_vector(ray.dir);
      const double denom = dot(d, normal);
      if (std::abs(denom) < 1e-9 * length(d)) continue;
      const double t = dot(center - o, normal) / denom;
      const Vec3d hit = o + d * t;
      const Vec3d off = hit - center;
      if (dot(off, off) > r2) continue;
      const double depth = dot(local_to_world.transform_point(hit) - view.eye, view.forward);
      fragment(px, py, depth, hit);
    }
}

}  // namespace pbs
