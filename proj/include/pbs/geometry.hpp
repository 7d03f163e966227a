#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace pbs {

template <typename T>
struct Vec3 {
  T x{}, y{}, z{};

  constexpr Vec3() = default;
  constexpr Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

  template <typename U>
  constexpr explicit Vec3(const Vec3<U>& o)
      : x(static_cast<T>(o.x)), y(static_cast<T>(o.y)), z(static_cast<T>(o.z)) {}

  constexpr T operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr T& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(T s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(T s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3& operator*=(T s) { x *= s; y *= s; z *= s; return *this; }
  constexpr bool operator==(const Vec3&) const = default;
};

template <typename T>
constexpr Vec3<T> operator*(T s, const Vec3<T>& v) { return v * s; }

template <typename T>
constexpr T dot(const Vec3<T>& a, const Vec3<T>& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

template <typename T>
constexpr Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <typename T>
T length(const Vec3<T>& v) { return std::sqrt(dot(v, v)); }

template <typename T>
Vec3<T> normalize(const Vec3<T>& v) {
  const T len = length(v);
  return len > T(0) ? v / len : Vec3<T>{};
}

template <typename T>
constexpr Vec3<T> cwise_min(const Vec3<T>& a, const Vec3<T>& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}

template <typename T>
constexpr Vec3<T> cwise_max(const Vec3<T>& a, const Vec3<T>& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

using Vec3f = Vec3<float>;
using Vec3d = Vec3<double>;

/// Squared Euclidean distance between two stored positions, evaluated in
/// double. Every distance comparison in sampling and metrics goes through
/// this so that different code paths agree bit-for-bit.
inline double distance_sq(const Vec3f& a, const Vec3f& b) {
  const double dx = double(a.x) - double(b.x);
  const double dy = double(a.y) - double(b.y);
  const double dz = double(a.z) - double(b.z);
  return dx * dx + dy * dy + dz * dz;
}

struct Rgba {
  float r = 0, g = 0, b = 0, a = 1;
  constexpr bool operator==(const Rgba&) const = default;
};

using Rgba8 = std::array<std::uint8_t, 4>;

inline std::uint8_t quantize_unit(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

inline Rgba8 to_rgba8(const Rgba& c) {
  return {quantize_unit(c.r), quantize_unit(c.g), quantize_unit(c.b), quantize_unit(c.a)};
}

inline Rgba to_rgba(const Rgba8& c) {
  return {c[0] / 255.0f, c[1] / 255.0f, c[2] / 255.0f, c[3] / 255.0f};
}

/// Axis-aligned box. A default-constructed box is empty (min > max).
struct Box3 {
  Vec3d min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  Vec3d max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

  Box3() = default;
  Box3(const Vec3d& lo, const Vec3d& hi) : min(lo), max(hi) {}

  bool empty() const { return min.x > max.x || min.y > max.y || min.z > max.z; }
  Vec3d center() const { return (min + max) * 0.5; }
  Vec3d extent() const { return max - min; }
  double diagonal() const { return empty() ? 0.0 : length(extent()); }

  void extend(const Vec3d& p) {
    min = cwise_min(min, p);
    max = cwise_max(max, p);
  }
  void extend(const Box3& b) {
    if (b.empty()) return;
    extend(b.min);
    extend(b.max);
  }

  bool contains(const Vec3d& p, double eps = 0.0) const {
    return p.x >= min.x - eps && p.x <= max.x + eps && p.y >= min.y - eps && p.y <= max.y + eps &&
           p.z >= min.z - eps && p.z <= max.z + eps;
  }
  bool contains(const Box3& b, double eps = 0.0) const {
    return !b.empty() && contains(b.min, eps) && contains(b.max, eps);
  }
  bool intersects(const Box3& b) const {
    return !empty() && !b.empty() && min.x <= b.max.x && max.x >= b.min.x && min.y <= b.max.y &&
           max.y >= b.min.y && min.z <= b.max.z && max.z >= b.min.z;
  }
  Vec3d closest_point(const Vec3d& p) const {
    return {std::clamp(p.x, min.x, max.x), std::clamp(p.y, min.y, max.y),
            std::clamp(p.z, min.z, max.z)};
  }
  Vec3d corner(int i) const {
    return {(i & 1) ? max.x : min.x, (i & 2) ? max.y : min.y, (i & 4) ? max.z : min.z};
  }
  Box3 expanded(double eps) const {
    return {min - Vec3d{eps, eps, eps}, max + Vec3d{eps, eps, eps}};
  }

  bool operator==(const Box3&) const = default;
};

/// Row-major affine 4x4 matrix (last row is 0 0 0 1 for affine transforms).
struct Mat4 {
  std::array<double, 16> m{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};

  static Mat4 identity() { return {}; }
  static Mat4 translation(const Vec3d& t) {
    Mat4 r;
    r(0, 3) = t.x;
    r(1, 3) = t.y;
    r(2, 3) = t.z;
    return r;
  }
  static Mat4 scale(const Vec3d& s) {
    Mat4 r;
    r(0, 0) = s.x;
    r(1, 1) = s.y;
    r(2, 2) = s.z;
    return r;
  }
  static Mat4 scale(double s) { return scale({s, s, s}); }
  /// Rotation about a unit axis (right-handed).
  static Mat4 rotation(const Vec3d& axis, double radians);

  double& operator()(int r, int c) { return m[r * 4 + c]; }
  double operator()(int r, int c) const { return m[r * 4 + c]; }

  Mat4 operator*(const Mat4& o) const {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0;
        for (int k = 0; k < 4; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }

  Vec3d transform_point(const Vec3d& p) const {
    return {m[0] * p.x + m[1] * p.y + m[2] * p.z + m[3],
            m[4] * p.x + m[5] * p.y + m[6] * p.z + m[7],
            m[8] * p.x + m[9] * p.y + m[10] * p.z + m[11]};
  }
  Vec3d transform_vector(const Vec3d& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[4] * v.x + m[5] * v.y + m[6] * v.z,
            m[8] * v.x + m[9] * v.y + m[10] * v.z};
  }

  /// Inverse of an affine matrix; throws pbs::Error when singular.
  Mat4 affine_inverse() const;
  /// Inverse-transpose of the linear part, for transforming normals.
  Mat4 normal_matrix() const;
  bool is_affine() const { return m[12] == 0 && m[13] == 0 && m[14] == 0 && m[15] == 1; }

  bool operator==(const Mat4&) const = default;
};

/// Axis-aligned box enclosing the transformed corners of `b`.
Box3 transform_box(const Mat4& m, const Box3& b);

}  // namespace pbs
