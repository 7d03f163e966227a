#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pbs/geometry.hpp"
#include "pbs/loose_octree.hpp"
#include "pbs/mesh.hpp"

namespace pbs {

struct SurfelCloud;

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = ~NodeId{0};

struct SceneNode {
  NodeId id = kNoNode;
  std::string name;
  Mat4 transform;  // local-to-world
  Box3 bounds;     // world space, tight over the subtree's geometry
  std::shared_ptr<const TriangleMesh> mesh;  // leaves only
  std::vector<NodeId> children;              // inner nodes only
  std::shared_ptr<const SurfelCloud> lod;    // node-local coordinates
  std::uint64_t triangle_count = 0;          // includes descendants
  Box3 cell_bounds;  // loose octree cell bounds for nodes created by build_spatial_structure

  bool is_leaf() const { return children.empty(); }
};

/// Tree-shaped scene graph stored as a flat node array. Nodes are added
/// first, then `finalize` validates the tree and fills the cached bounds and
/// triangle counts. After that the scene is read-only except for LOD slots.
class Scene {
 public:
  NodeId add_leaf(std::shared_ptr<const TriangleMesh> mesh, const Mat4& transform = Mat4::identity(),
                  std::string name = {});
  NodeId add_group(std::vector<NodeId> children, const Mat4& transform = Mat4::identity(),
                   std::string name = {});
  /// Appends a node verbatim (used when reading manifests); ids must be dense.
  void add_node(SceneNode node);

  void set_root(NodeId id) { root_ = id; }
  NodeId root() const { return root_; }

  /// Checks the tree shape (single root, no cycles, no shared children,
  /// leaves carry meshes) and recomputes bounds and triangle counts.
  void finalize();

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const SceneNode& node(NodeId id) const { return nodes_.at(id); }
  SceneNode& node(NodeId id) { return nodes_.at(id); }
  const std::vector<SceneNode>& nodes() const { return nodes_; }
  NodeId parent(NodeId id) const { return parents_.at(id); }

  /// Nodes of the subtree rooted at `id` in post-order (children first).
  std::vector<NodeId> post_order(NodeId id) const;
  std::vector<NodeId> post_order() const { return post_order(root_); }

  /// Transform from `descendant`'s local frame into `ancestor`'s local frame.
  Mat4 relative_transform(NodeId ancestor, NodeId descendant) const;

 private:
  std::vector<SceneNode> nodes_;
  std::vector<NodeId> parents_;
  NodeId root_ = kNoNode;
};

/// Tight world-space box over the transformed geometry of the subtree.
Box3 node_bounds_world(const Scene& scene, NodeId id);

/// Sum of leaf mesh triangle counts in the subtree.
std::uint64_t subtree_triangle_count(const Scene& scene, NodeId id);

/// All leaf meshes of the subtree merged into one mesh in world coordinates.
TriangleMesh flatten_subtree(const Scene& scene, NodeId id);

struct SpatialBuildParams {
  LooseOctreeParams octree;
};

/// Organizes a flat list of leaf nodes (mesh + world transform) into a tree
/// whose inner nodes correspond to loose octree cells. A single input node
/// becomes the root itself; cells holding exactly one entry collapse into it.
Scene build_spatial_structure(std::vector<SceneNode> leaves, const SpatialBuildParams& params = {});

}  // namespace pbs
