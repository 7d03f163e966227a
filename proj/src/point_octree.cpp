#include "pbs/point_octree.hpp"

#include <algorithm>
#include <array>

namespace pbs {

PointOctree::PointOctree(const Box3& bounds, std::size_t leaf_capacity, int max_depth)
    : leaf_capacity_(std::max<std::size_t>(1, leaf_capacity)), max_depth_(max_depth) {
  Node root;
  if (bounds.empty()) {
    root.center = {0, 0, 0};
    root.half = 1;
  } else {
    const Vec3d e = bounds.extent();
    root.center = bounds.center();
    root.half = std::max(0.5 * std::max({e.x, e.y, e.z}), 1e-12);
  }
  nodes_.push_back(std::move(root));
}

int PointOctree::octant(const Node& n, const Vec3f& p) const {
  return (p.x >= n.center.x ? 1 : 0) | (p.y >= n.center.y ? 2 : 0) | (p.z >= n.center.z ? 4 : 0);
}

void PointOctree::insert(std::uint32_t id, const Vec3f& p) {
  const auto slot = static_cast<std::uint32_t>(points_.size());
  points_.push_back({p, id});
  ++count_;
  std::size_t cur = 0;
  for (;;) {
    Node& n = nodes_[cur];
    n.lo = cwise_min(n.lo, p);
    n.hi = cwise_max(n.hi, p);
    if (n.first_child < 0) break;
    cur = static_cast<std::size_t>(n.first_child + octant(n, p));
  }
  nodes_[cur].slots.push_back(slot);
  if (nodes_[cur].slots.size() > leaf_capacity_ && nodes_[cur].depth < max_depth_) split(cur);
}

void PointOctree::split(std::size_t idx) {
  const auto first = static_cast<std::int32_t>(nodes_.size());
  const Vec3d center = nodes_[idx].center;
  const double h = nodes_[idx].half * 0.5;
  const int depth = nodes_[idx].depth + 1;
  for (int o = 0; o < 8; ++o) {
    Node c;
    c.center = {center.x + ((o & 1) ? h : -h), center.y + ((o & 2) ? h : -h), center.z + ((o & 4) ? h : -h)};
    c.half = h;
    c.depth = depth;
    nodes_.push_back(std::move(c));
  }
  Node& n = nodes_[idx];
  n.first_child = first;
  std::vector<std::uint32_t> slots = std::move(n.slots);
  n.slots.clear();
  for (auto s : slots) {
    const Vec3f& p = points_[s].p;
    Node& c = nodes_[static_cast<std::size_t>(first + octant(nodes_[idx], p))];
    c.lo = cwise_min(c.lo, p);
    c.hi = cwise_max(c.hi, p);
    c.slots.push_back(s);
  }
  // A split that leaves everything in one child (clustered input) is fine;
  // further inserts will split that child when it overflows.
}

namespace {

inline double box_dist_sq(const Vec3f& lo, const Vec3f& hi, const Vec3f& p) {
  auto axis = [](float l, float h, float v) {
    if (v < l) return double(l) - double(v);
    if (v > h) return double(v) - double(h);
    return 0.0;
  };
  const double dx = axis(lo.x, hi.x, p.x), dy = axis(lo.y, hi.y, p.y), dz = axis(lo.z, hi.z, p.z);
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

PointOctree::Nearest PointOctree::nearest(const Vec3f& p, std::uint32_t exclude, double stop_below_sq) const {
  Nearest best;
  if (count_ == 0) return best;
  bool done = false;
  search(0, p, exclude, stop_below_sq, best, done);
  return best;
}

void PointOctree::search(std::size_t idx, const Vec3f& p, std::uint32_t exclude, double stop_below_sq,
                         Nearest& best, bool& done) const {
  const Node& n = nodes_[idx];
  if (n.first_child < 0) {
    for (auto s : n.slots) {
      const Point& q = points_[s];
      if (q.id == exclude) continue;
      const double d = distance_sq(p, q.p);
      if (d < best.dist_sq || (d == best.dist_sq && q.id < best.id)) {
        best.dist_sq = d;
        best.id = q.id;
        if (d < stop_below_sq) {
          done = true;
          return;
        }
      }
    }
    return;
  }
  std::array<std::pair<double, int>, 8> order;
  int m = 0;
  for (int o = 0; o < 8; ++o) {
    const Node& c = nodes_[static_cast<std::size_t>(n.first_child + o)];
    if (c.lo.x > c.hi.x) continue;  // empty child
    order[m++] = {box_dist_sq(c.lo, c.hi, p), o};
  }
  std::sort(order.begin(), order.begin() + m);
  for (int i = 0; i < m; ++i) {
    if (order[i].first > best.dist_sq) break;
    search(static_cast<std::size_t>(n.first_child + order[i].second), p, exclude, stop_below_sq, best, done);
    if (done) return;
  }
}

}  // namespace pbs
