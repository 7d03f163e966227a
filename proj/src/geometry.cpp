#include "pbs/geometry.hpp"

#include "pbs/error.hpp"

namespace pbs {

Mat4 Mat4::rotation(const Vec3d& axis, double radians) {
  const Vec3d a = normalize(axis);
  const double c = std::cos(radians), s = std::sin(radians), t = 1.0 - c;
  Mat4 r;
  r(0, 0) = t * a.x * a.x + c;
  r(0, 1) = t * a.x * a.y - s * a.z;
  r(0, 2) = t * a.x * a.z + s * a.y;
  r(1, 0) = t * a.x * a.y + s * a.z;
  r(1, 1) = t * a.y * a.y + c;
  r(1, 2) = t * a.y * a.z - s * a.x;
  r(2, 0) = t * a.x * a.z - s * a.y;
  r(2, 1) = t * a.y * a.z + s * a.x;
  r(2, 2) = t * a.z * a.z + c;
  return r;
}

namespace {

// Inverse of the upper-left 3x3 block via the adjugate.
std::array<double, 9> invert3(const Mat4& a) {
  const double a00 = a(0, 0), a01 = a(0, 1), a02 = a(0, 2);
  const double a10 = a(1, 0), a11 = a(1, 1), a12 = a(1, 2);
  const double a20 = a(2, 0), a21 = a(2, 1), a22 = a(2, 2);
  const double c00 = a11 * a22 - a12 * a21;
  const double c01 = a12 * a20 - a10 * a22;
  const double c02 = a10 * a21 - a11 * a20;
  const double det = a00 * c00 + a01 * c01 + a02 * c02;
  if (!(std::abs(det) > 1e-300)) throw Error("matrix is singular");
  const double inv = 1.0 / det;
  return {c00 * inv,
          (a02 * a21 - a01 * a22) * inv,
          (a01 * a12 - a02 * a11) * inv,
          c01 * inv,
          (a00 * a22 - a02 * a20) * inv,
          (a02 * a10 - a00 * a12) * inv,
          c02 * inv,
          (a01 * a20 - a00 * a21) * inv,
          (a00 * a11 - a01 * a10) * inv};
}

}  // namespace

Mat4 Mat4::affine_inverse() const {
  if (!is_affine()) throw Error("matrix is not affine");
  const auto r = invert3(*this);
  Mat4 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = r[i * 3 + j];
  const Vec3d t{m[3], m[7], m[11]};
  for (int i = 0; i < 3; ++i)
    out(i, 3) = -(r[i * 3 + 0] * t.x + r[i * 3 + 1] * t.y + r[i * 3 + 2] * t.z);
  return out;
}

Mat4 Mat4::normal_matrix() const {
  const auto r = invert3(*this);
  Mat4 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = r[j * 3 + i];
  return out;
}

Box3 transform_box(const Mat4& m, const Box3& b) {
  Box3 out;
  if (b.empty()) return out;
  for (int i = 0; i < 8; ++i) out.extend(m.transform_point(b.corner(i)));
  return out;
}

}  // namespace pbs
