#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "pbs/geometry.hpp"

namespace pbs {

struct LooseOctreeParams {
  double looseness = 2.0;
  std::size_t max_items_per_leaf = 8;
  int max_depth = 16;
};

/// Loose octree over boxed items (Ulrich-style). Each cell's loose bounds
/// are its tight cube scaled by `looseness` about the cell center; an item
/// lives in the deepest cell whose loose bounds contain it, choosing the
/// child by the item's center.
template <typename T>
class LooseOctree {
 public:
  struct Item {
    T value;
    Box3 bounds;
  };

  struct Cell {
    Vec3d center;
    double half = 0;  // half side of the tight cube
    int depth = 0;
    std::vector<Item> items;
    std::array<std::unique_ptr<Cell>, 8> children;

    bool is_leaf() const {
      for (const auto& c : children)
        if (c) return false;
      return true;
    }
    Box3 tight_bounds() const {
      return {center - Vec3d{half, half, half}, center + Vec3d{half, half, half}};
    }
  };

  /// `world` must enclose every inserted item.
  explicit LooseOctree(const Box3& world, LooseOctreeParams params = {}) : params_(params) {
    const Vec3d e = world.extent();
    double half = 0.5 * std::max({e.x, e.y, e.z});
    if (!(half > 0)) half = 0.5;
    root_ = std::make_unique<Cell>();
    root_->center = world.center();
    root_->half = half;
  }

  const LooseOctreeParams& params() const { return params_; }
  const Cell& root() const { return *root_; }
  std::size_t size() const { return size_; }

  Box3 loose_bounds(const Cell& c) const {
    const double h = c.half * params_.looseness;
    return {c.center - Vec3d{h, h, h}, c.center + Vec3d{h, h, h}};
  }

  void insert(T value, const Box3& bounds) {
    insert_into(*root_, Item{std::move(value), bounds});
    ++size_;
  }

  /// All items whose bounds intersect `box`.
  std::vector<T> query(const Box3& box) const {
    std::vector<T> out;
    query_cell(*root_, box, out);
    return out;
  }

  /// Visits every cell depth-first; `fn(cell, ancestors)` where ancestors
  /// lists the cells from the root down to the parent.
  void for_each_cell(const std::function<void(const Cell&, const std::vector<const Cell*>&)>& fn) const {
    std::vector<const Cell*> chain;
    visit(*root_, chain, fn);
  }

 private:
  int octant(const Cell& c, const Vec3d& p) const {
    return (p.x >= c.center.x ? 1 : 0) | (p.y >= c.center.y ? 2 : 0) | (p.z >= c.center.z ? 4 : 0);
  }

  Cell& child(Cell& c, int oct) {
    auto& slot = c.children[oct];
    if (!slot) {
      slot = std::make_unique<Cell>();
      const double h = c.half * 0.5;
      slot->half = h;
      slot->depth = c.depth + 1;
      slot->center = {c.center.x + ((oct & 1) ? h : -h), c.center.y + ((oct & 2) ? h : -h),
                      c.center.z + ((oct & 4) ? h : -h)};
    }
    return *slot;
  }

  bool fits_child(const Cell& c, const Item& item) const {
    const double h = c.half * 0.5;
    const Vec3d e = item.bounds.extent() * 0.5;
    // Child loose half-size is h * looseness; the item center lies inside the
    // child's tight cube, so it fits when its half-extent stays within the slack.
    const double slack = h * (params_.looseness - 1.0);
    return e.x <= slack && e.y <= slack && e.z <= slack;
  }

  void insert_into(Cell& c, Item item) {
    if (c.is_leaf()) {
      c.items.push_back(std::move(item));
      if (c.items.size() > params_.max_items_per_leaf && c.depth < params_.max_depth) split(c);
      return;
    }
    if (fits_child(c, item)) {
      Cell& ch = child(c, octant(c, item.bounds.center()));
      if (loose_bounds(ch).contains(item.bounds)) {
        insert_into(ch, std::move(item));
        return;
      }
    }
    c.items.push_back(std::move(item));
  }

  void split(Cell& c) {
    std::vector<Item> items = std::move(c.items);
    c.items.clear();
    bool any_moved = false;
    for (const auto& it : items)
      if (fits_child(c, it)) any_moved = true;
    if (!any_moved) {
      c.items = std::move(items);
      return;
    }
    // Materialize children so the cell is no longer a leaf, then reinsert.
    for (auto& it : items) {
      if (fits_child(c, it)) {
        Cell& ch = child(c, octant(c, it.bounds.center()));
        if (loose_bounds(ch).contains(it.bounds)) {
          insert_into(ch, std::move(it));
          continue;
        }
      }
      c.items.push_back(std::move(it));
    }
  }

  void query_cell(const Cell& c, const Box3& box, std::vector<T>& out) const {
    if (!loose_bounds(c).intersects(box)) return;
    for (const auto& it : c.items)
      if (it.bounds.intersects(box)) out.push_back(it.value);
    for (const auto& ch : c.children)
      if (ch) query_cell(*ch, box, out);
  }

  void visit(const Cell& c, std::vector<const Cell*>& chain,
             const std::function<void(const Cell&, const std::vector<const Cell*>&)>& fn) const {
    fn(c, chain);
    chain.push_back(&c);
    for (const auto& ch : c.children)
      if (ch) visit(*ch, chain, fn);
    chain.pop_back();
  }

  LooseOctreeParams params_;
  std::unique_ptr<Cell> root_;
  std::size_t size_ = 0;
};

}  // namespace pbs
