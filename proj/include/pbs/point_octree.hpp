#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pbs/geometry.hpp"

namespace pbs {

/// Incremental point octree answering nearest-neighbour distance queries.
/// Every node keeps the tight box of the points below it, so pruning is
/// valid even for points inserted outside the initial bounds. Distances use
/// distance_sq(), and pruning only discards nodes whose lower bound is not
/// smaller than the current best, so results equal a brute-force minimum.
class PointOctree {
 public:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  explicit PointOctree(const Box3& bounds, std::size_t leaf_capacity = 16, int max_depth = 24);

  void insert(std::uint32_t id, const Vec3f& p);
  std::size_t size() const { return count_; }

  struct Nearest {
    double dist_sq = std::numeric_limits<double>::infinity();
    std::uint32_t id = kNone;
  };

  /// Nearest stored point to `p`, ignoring the point with id `exclude`.
  /// When `stop_below_sq` is positive the search may return as soon as it
  /// has found any point with squared distance strictly below it; the
  /// returned distance is then only an upper bound on the true minimum.
  Nearest nearest(const Vec3f& p, std::uint32_t exclude = kNone, double stop_below_sq = -1.0) const;

 private:
  struct Node {
    Vec3d center;
    double half = 0;
    Vec3f lo{std::numeric_limits<float>::infinity(), std::numeric_limits<float>::infinity(),
             std::numeric_limits<float>::infinity()};
    Vec3f hi{-std::numeric_limits<float>::infinity(), -std::numeric_limits<float>::infinity(),
             -std::numeric_limits<float>::infinity()};
    std::int32_t first_child = -1;  // index of 8 consecutive children, -1 for leaves
    int depth = 0;
    std::vector<std::uint32_t> slots;  // leaf contents (indices into points_)
  };

  struct Point {
    Vec3f p;
    std::uint32_t id;
  };

  void split(std::size_t node);
  int octant(const Node& n, const Vec3f& p) const;
  void search(std::size_t node, const Vec3f& p, std::uint32_t exclude, double stop_below_sq, Nearest& best,
              bool& done) const;

  std::vector<Node> nodes_;
  std::vector<Point> points_;
  std::size_t leaf_capacity_;
  int max_depth_;
  std::size_t count_ = 0;
};

}  // namespace pbs
