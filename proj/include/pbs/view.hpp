#pragma once

#include "pbs/geometry.hpp"

namespace pbs {

/// A pinhole or orthographic view with square pixels. Screen coordinates
/// have x to the right and y downward; pixel (i, j) covers [i, i+1) x [j, j+1)
/// and is sampled at its center. Depth is the distance along `forward`
/// from the eye.
struct ViewProjection {
  enum class Kind { Orthographic, Perspective };

  Kind kind = Kind::Orthographic;
  Vec3d eye;
  Vec3d right{1, 0, 0};
  Vec3d up{0, 1, 0};
  Vec3d forward{0, 0, -1};
  int width = 1;
  int height = 1;
  /// Orthographic: world units per pixel.
  double pixel_size = 1.0;
  /// Perspective: pixels per world unit at depth 1, i.e. height / (2 tan(fov/2)).
  double focal = 1.0;

  double principal_x() const { return 0.5 * width; }
  double principal_y() const { return 0.5 * height; }

  struct Projected {
    double x, y, depth;
  };

  Projected project(const Vec3d& p) const {
    const Vec3d d = p - eye;
    const double vx = dot(d, right), vy = dot(d, up), vz = dot(d, forward);
    if (kind == Kind::Orthographic)
      return {principal_x() + vx / pixel_size, principal_y() - vy / pixel_size, vz};
    return {principal_x() + focal * vx / vz, principal_y() - focal * vy / vz, vz};
  }

  struct Ray {
    Vec3d origin, dir;  // dir is unit length
  };

  /// Ray through screen position (sx, sy), e.g. a pixel center (i + 0.5, j + 0.5).
  Ray ray(double sx, double sy) const {
    const double u = sx - principal_x(), v = principal_y() - sy;
    if (kind == Kind::Orthographic) return {eye + right * (u * pixel_size) + up * (v * pixel_size), forward};
    return {eye, normalize(forward + right * (u / focal) + up * (v / focal))};
  }

  /// World distance between horizontally adjacent pixel centers on the plane
  /// at the given depth.
  double pixel_spacing_at(double depth) const {
    return kind == Kind::Orthographic ? pixel_size : depth / focal;
  }
};

/// Right-handed orthonormal basis looking along `forward`. `up_hint` is used
/// unless nearly parallel to `forward`.
void make_view_basis(const Vec3d& forward, const Vec3d& up_hint, Vec3d& right, Vec3d& up);

}  // namespace pbs
