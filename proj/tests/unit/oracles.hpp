#pragma once

// Independent reference implementations used as test oracles. They are
// deliberately naive (brute force, recomputed from scratch) and share no code
// with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "pbs/geometry.hpp"
#include "pbs/image.hpp"
#include "pbs/surfel.hpp"

namespace oracle {

using pbs::Vec3d;
using pbs::Vec3f;

inline double dist2(const Vec3f& a, const Vec3f& b) {
  const double dx = double(a.x) - double(b.x), dy = double(a.y) - double(b.y), dz = double(a.z) - double(b.z);
  return dx * dx + dy * dy + dz * dz;
}

/// Farthest-first traversal recomputing every distance from scratch.
inline std::vector<std::uint32_t> greedy(const std::vector<Vec3f>& pts, std::uint32_t start) {
  const std::size_t n = pts.size();
  std::vector<std::uint32_t> order{start};
  std::vector<char> used(n, 0);
  used[start] = 1;
  while (order.size() < n) {
    double best = -1;
    std::uint32_t arg = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      double d = std::numeric_limits<double>::infinity();
      for (auto c : order) d = std::min(d, dist2(pts[i], pts[c]));
      if (d > best) {
        best = d;
        arg = i;
      }
    }
    used[arg] = 1;
    order.push_back(arg);
  }
  return order;
}

/// Nearest other point distance for each of the first `prefix` points.
inline std::vector<double> nn_distances(const std::vector<Vec3f>& pts, std::size_t prefix) {
  std::vector<double> out(prefix);
  for (std::size_t i = 0; i < prefix; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < prefix; ++j)
      if (j != i) best = std::min(best, dist2(pts[i], pts[j]));
    out[i] = std::sqrt(best);
  }
  return out;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Ray/triangle hit distance (Moller-Trumbore), nullopt on miss.
inline std::optional<double> ray_triangle(const Vec3d& o, const Vec3d& d, const Vec3d& a, const Vec3d& b,
                                          const Vec3d& c) {
  const Vec3d e1 = b - a, e2 = c - a;
  const Vec3d p = pbs::cross(d, e2);
  const double det = pbs::dot(e1, p);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3d t = o - a;
  const double u = pbs::dot(t, p) * inv;
  if (u < 0 || u > 1) return std::nullopt;
  const Vec3d q = pbs::cross(t, e1);
  const double v = pbs::dot(d, q) * inv;
  if (v < 0 || u + v > 1) return std::nullopt;
  return pbs::dot(e2, q) * inv;
}

/// Textbook SSIM: each window's statistics computed directly.
inline double ssim(const pbs::RgbImage& a, const pbs::RgbImage& b) {
  auto Y = [](const pbs::RgbImage& im, int x, int y) {
    const float* p = im.at(x, y);
    return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  };
  const double C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;
  double total = 0;
  int count = 0;
  for (int y0 = 0; y0 + 8 <= a.height; ++y0)
    for (int x0 = 0; x0 + 8 <= a.width; ++x0) {
      double ma = 0, mb = 0;
      for (int y = y0; y < y0 + 8; ++y)
        for (int x = x0; x < x0 + 8; ++x) {
          ma += Y(a, x, y);
          mb += Y(b, x, y);
        }
      ma /= 64;
      mb /= 64;
      double va = 0, vb = 0, cov = 0;
      for (int y = y0; y < y0 + 8; ++y)
        for (int x = x0; x < x0 + 8; ++x) {
          const double da = Y(a, x, y) - ma, db = Y(b, x, y) - mb;
          va += da * da;
          vb += db * db;
          cov += da * db;
        }
      va /= 64;
      vb /= 64;
      cov /= 64;
      total += ((2 * ma * mb + C1) * (2 * cov + C2)) / ((ma * ma + mb * mb + C1) * (va + vb + C2));
      ++count;
    }
  return total / count;
}

inline std::vector<Vec3f> random_points(std::size_t n, std::uint64_t seed, float extent = 1.0f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, extent);
  std::vector<Vec3f> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

inline pbs::CandidateSet as_candidates(const std::vector<Vec3f>& pts) {
  pbs::CandidateSet c;
  for (const auto& p : pts) c.surfels.push_back({p, {0, 0, 1}, {128, 128, 128, 255}});
  return c;
}

}  // namespace oracle
