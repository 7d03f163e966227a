#include "pbs/scene.hpp"

#include <functional>
#include <optional>

#include "pbs/error.hpp"

namespace pbs {

NodeId Scene::add_leaf(std::shared_ptr<const TriangleMesh> mesh, const Mat4& transform,
                       std::string name) {
  if (!mesh) throw Error("leaf node requires a mesh");
  SceneNode n;
  n.id = static_cast<NodeId>(nodes_.size());
  n.name = std::move(name);
  n.transform = transform;
  n.mesh = std::move(mesh);
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

NodeId Scene::add_group(std::vector<NodeId> children, const Mat4& transform, std::string name) {
  if (children.empty()) throw Error("group node requires children");
  SceneNode n;
  n.id = static_cast<NodeId>(nodes_.size());
  n.name = std::move(name);
  n.transform = transform;
  n.children = std::move(children);
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

void Scene::add_node(SceneNode node) {
  if (node.id != nodes_.size())
    throw Error("node id " + std::to_string(node.id) + " out of sequence");
  nodes_.push_back(std::move(node));
}

void Scene::finalize() {
  if (nodes_.empty()) throw Error("scene is empty");
  if (root_ == kNoNode || root_ >= nodes_.size()) throw Error("scene root is not set");

  parents_.assign(nodes_.size(), kNoNode);
  for (const auto& n : nodes_) {
    if (!n.transform.is_affine()) throw Error("node " + std::to_string(n.id) + " transform is not affine");
    if (n.children.empty() && !n.mesh)
      throw Error("leaf node " + std::to_string(n.id) + " has no mesh");
    if (!n.children.empty() && n.mesh)
      throw Error("inner node " + std::to_string(n.id) + " carries a mesh");
    for (NodeId c : n.children) {
      if (c >= nodes_.size()) throw Error("node " + std::to_string(n.id) + " has dangling child");
      if (c == root_ || parents_[c] != kNoNode)
        throw Error("node " + std::to_string(c) + " has more than one parent");
      parents_[c] = n.id;
    }
  }

  // Every node must be reachable from the root exactly once.
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<NodeId> stack{root_};
  std::size_t reached = 0;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (seen[id]) throw Error("scene graph contains a cycle");
    seen[id] = 1;
    ++reached;
    for (NodeId c : nodes_[id].children) stack.push_back(c);
  }
  if (reached != nodes_.size()) throw Error("scene contains nodes unreachable from the root");

  for (NodeId id : post_order()) {
    auto& n = nodes_[id];
    n.bounds = node_bounds_world(*this, id);
    n.triangle_count = n.mesh ? n.mesh->triangle_count() : 0;
    for (NodeId c : n.children) n.triangle_count += nodes_[c].triangle_count;
  }
}

std::vector<NodeId> Scene::post_order(NodeId id) const {
  std::vector<NodeId> out;
  std::vector<std::pair<NodeId, std::size_t>> stack{{id, 0}};
  while (!stack.empty()) {
    auto& [cur, next] = stack.back();
    const auto& ch = nodes_.at(cur).children;
    if (next < ch.size()) {
      const NodeId c = ch[next++];
      stack.push_back({c, 0});
    } else {
      out.push_back(cur);
      stack.pop_back();
    }
  }
  return out;
}

Mat4 Scene::relative_transform(NodeId ancestor, NodeId descendant) const {
  return nodes_.at(ancestor).transform.affine_inverse() * nodes_.at(descendant).transform;
}

Box3 node_bounds_world(const Scene& scene, NodeId id) {
  const auto& n = scene.node(id);
  Box3 b;
  if (n.mesh) {
    for (const auto& v : n.mesh->vertices) b.extend(n.transform.transform_point(Vec3d(v.position)));
  }
  for (NodeId c : n.children) b.extend(node_bounds_world(scene, c));
  return b;
}

std::uint64_t subtree_triangle_count(const Scene& scene, NodeId id) {
  std::uint64_t total = 0;
  for (NodeId n : scene.post_order(id)) {
    const auto& node = scene.node(n);
    if (node.mesh) total += node.mesh->triangle_count();
  }
  return total;
}

TriangleMesh flatten_subtree(const Scene& scene, NodeId id) {
  TriangleMesh out;
  for (NodeId n : scene.post_order(id)) {
    const auto& node = scene.node(n);
    if (!node.mesh) continue;
    const Mat4 nm = node.transform.normal_matrix();
    const auto base = static_cast<std::uint32_t>(out.vertices.size());
    for (Vertex v : node.mesh->vertices) {
      v.position = Vec3f(node.transform.transform_point(Vec3d(v.position)));
      v.normal = Vec3f(normalize(nm.transform_vector(Vec3d(v.normal))));
      out.vertices.push_back(v);
    }
    for (const auto& t : node.mesh->triangles) out.triangles.push_back({base + t[0], base + t[1], base + t[2]});
  }
  return out;
}

Scene build_spatial_structure(std::vector<SceneNode> leaves, const SpatialBuildParams& params) {
  if (leaves.empty()) throw Error("build_spatial_structure: no input nodes");

  Scene scene;
  Box3 world;
  std::vector<Box3> boxes;
  for (auto& leaf : leaves) {
    if (!leaf.mesh || !leaf.children.empty())
      throw Error("build_spatial_structure expects leaf nodes with meshes");
    Box3 b;
    for (const auto& v : leaf.mesh->vertices) b.extend(leaf.transform.transform_point(Vec3d(v.position)));
    if (b.empty()) throw Error("input node '" + leaf.name + "' has empty bounds");
    boxes.push_back(b);
    world.extend(b);
    scene.add_leaf(leaf.mesh, leaf.transform, leaf.name);
  }

  LooseOctree<NodeId> octree(world, params.octree);
  for (NodeId i = 0; i < boxes.size(); ++i) octree.insert(i, boxes[i]);

  using Cell = LooseOctree<NodeId>::Cell;
  std::function<std::optional<NodeId>(const Cell&)> convert = [&](const Cell& c) -> std::optional<NodeId> {
    std::vector<NodeId> kids;
    for (const auto& ch : c.children)
      if (ch)
        if (auto id = convert(*ch)) kids.push_back(*id);
    for (const auto& it : c.items) kids.push_back(it.value);
    if (kids.empty()) return std::nullopt;
    if (kids.size() == 1) return kids.front();
    const NodeId g = scene.add_group(std::move(kids), Mat4::identity(),
                                     "cell_d" + std::to_string(c.depth));
    scene.node(g).cell_bounds = octree.loose_bounds(c);
    return g;
  };

  scene.set_root(*convert(octree.root()));
  scene.finalize();
  return scene;
}

}  // namespace pbs
