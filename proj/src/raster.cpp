#include "pbs/raster.hpp"

#include <cmath>

#include "pbs/error.hpp"
#include "pbs/image.hpp"
#include "pbs/raster_core.hpp"

namespace pbs {

void make_view_basis(const Vec3d& forward, const Vec3d& up_hint, Vec3d& right, Vec3d& up) {
  const Vec3d f = normalize(forward);
  Vec3d hint = normalize(up_hint);
  if (std::abs(dot(hint, f)) > 0.999) hint = std::abs(f.z) < 0.9 ? Vec3d{0, 0, 1} : Vec3d{1, 0, 0};
  right = normalize(cross(f, hint));
  up = cross(right, f);
}

GBuffer::GBuffer(int w, int h)
    : width(w),
      height(h),
      covered(static_cast<std::size_t>(w) * h, 0),
      position(static_cast<std::size_t>(w) * h),
      normal(static_cast<std::size_t>(w) * h),
      color(static_cast<std::size_t>(w) * h),
      depth(static_cast<std::size_t>(w) * h, std::numeric_limits<float>::infinity()) {}

std::size_t GBuffer::covered_count() const {
  std::size_t n = 0;
  for (auto c : covered) n += c;
  return n;
}

bool GBuffer::operator==(const GBuffer& o) const {
  if (width != o.width || height != o.height || covered != o.covered) return false;
  for (std::size_t i = 0; i < covered.size(); ++i) {
    if (!covered[i]) continue;
    if (!(position[i] == o.position[i]) || !(normal[i] == o.normal[i]) || !(color[i] == o.color[i]) ||
        depth[i] != o.depth[i])
      return false;
  }
  return true;
}

std::vector<Vec3d> corner_directions(const Box3& box) {
  std::vector<Vec3d> dirs;
  const Vec3d c = box.center();
  for (int i = 0; i < 8; ++i) {
    Vec3d d = c - box.corner(i);
    // Flat boxes have coincident corners along the degenerate axis; fall back
    // to the unit-cube diagonal for that corner.
    if (length(d) == 0.0) d = Vec3d{(i & 1) ? -1.0 : 1.0, (i & 2) ? -1.0 : 1.0, (i & 4) ? -1.0 : 1.0};
    dirs.push_back(normalize(d));
  }
  return dirs;
}

double full_cloud_radius(const SurfelCloud& cloud) {
  if (cloud.surfels.size() < 2 || !(cloud.r_m > 0)) return 0.0;
  const double ref = std::min<double>(cloud.p_m, static_cast<double>(cloud.size()));
  return cloud.r_m * std::sqrt(ref / static_cast<double>(cloud.size()));
}

namespace {

// Geometry of a capture, flattened into the captured node's local frame.
struct PreparedMesh {
  std::vector<Vec3d> positions;
  std::vector<Vec3f> normals;
  const TriangleMesh* mesh = nullptr;
};

struct PreparedCloud {
  const SurfelCloud* cloud = nullptr;
  Mat4 to_local;
  Mat4 normal_to_local;
  double radius = 0;
};

struct PreparedCapture {
  std::vector<PreparedMesh> meshes;
  std::vector<PreparedCloud> clouds;
  Box3 bounds;
};

double uniform_scale(const Mat4& m) {
  const double det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                     m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                     m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
  return std::cbrt(std::abs(det));
}

PreparedCapture prepare(const Scene& scene, NodeId node, CaptureSource source) {
  PreparedCapture out;
  const Mat4 world_to_node = scene.node(node).transform.affine_inverse();
  std::vector<NodeId> stack{node};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const auto& n = scene.node(id);
    const Mat4 to_local = world_to_node * n.transform;
    if (source == CaptureSource::ChildSurfelLods && id != node && n.lod && n.lod->size() > 0) {
      PreparedCloud pc;
      pc.cloud = n.lod.get();
      pc.to_local = to_local;
      pc.normal_to_local = to_local.normal_matrix();
      pc.radius = full_cloud_radius(*n.lod) * uniform_scale(to_local);
      out.clouds.push_back(pc);
      // Bounds still follow the original geometry of the subtree.
      for (NodeId d : scene.post_order(id)) {
        const auto& dn = scene.node(d);
        if (!dn.mesh) continue;
        const Mat4 m = world_to_node * dn.transform;
        for (const auto& v : dn.mesh->vertices) out.bounds.extend(m.transform_point(Vec3d(v.position)));
      }
      continue;
    }
    if (n.mesh) {
      PreparedMesh pm;
      pm.mesh = n.mesh.get();
      const Mat4 nm = to_local.normal_matrix();
      pm.positions.reserve(n.mesh->vertices.size());
      pm.normals.reserve(n.mesh->vertices.size());
      for (const auto& v : n.mesh->vertices) {
        const Vec3d p = to_local.transform_point(Vec3d(v.position));
        pm.positions.push_back(p);
        pm.normals.push_back(Vec3f(normalize(nm.transform_vector(Vec3d(v.normal)))));
        out.bounds.extend(p);
      }
      out.meshes.push_back(std::move(pm));
    }
    // Reverse push keeps traversal in child order.
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

GBuffer rasterize_prepared(const PreparedCapture& prep, const Vec3d& direction, const CaptureConfig& config) {
  if (config.resolution < 1) throw Error("capture resolution must be >= 1");
  const int res = static_cast<int>(config.resolution);
  GBuffer gb(res, res);
  if (prep.bounds.empty()) return gb;
  gb.view = fit_capture_view(prep.bounds, direction, config.resolution);
  const ViewProjection& view = gb.view;
  const Box3 clamp_box = prep.bounds;

  for (const auto& pm : prep.meshes) {
    const auto& mesh = *pm.mesh;
    std::vector<ViewProjection::Projected> proj(pm.positions.size());
    for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = view.project(pm.positions[i]);
    for (const auto& tri : mesh.triangles) {
      const Vec3d& a = pm.positions[tri[0]];
      const Vec3d& b = pm.positions[tri[1]];
      const Vec3d& c = pm.positions[tri[2]];
      if (config.cull_backfaces && dot(cross(b - a, c - a), view.forward) >= 0) continue;
      const auto& pa = proj[tri[0]];
      const auto& pb = proj[tri[1]];
      const auto& pc = proj[tri[2]];
      rasterize_triangle({pa.x, pa.y, pa.depth, 1.0}, {pb.x, pb.y, pb.depth, 1.0}, {pc.x, pc.y, pc.depth, 1.0},
                         res, res, [&](int px, int py, double depth, double l0, double l1, double l2) {
                           const std::size_t idx = gb.index(px, py);
                           const float d = static_cast<float>(depth);
                           if (!(d < gb.depth[idx])) return;
                           gb.depth[idx] = d;
                           gb.covered[idx] = 1;
                           const Vec3d p = a * l0 + b * l1 + c * l2;
                           gb.position[idx] = Vec3f(clamp_box.closest_point(p));
                           const Vec3d n = Vec3d(pm.normals[tri[0]]) * l0 + Vec3d(pm.normals[tri[1]]) * l1 +
                                           Vec3d(pm.normals[tri[2]]) * l2;
                           const Vec3d nn = normalize(n);
                           gb.normal[idx] = length(nn) > 0 ? Vec3f(nn) : pm.normals[tri[0]];
                           const auto& ca = mesh.vertices[tri[0]].color;
                           const auto& cb = mesh.vertices[tri[1]].color;
                           const auto& cc = mesh.vertices[tri[2]].color;
                           auto mix = [&](float x, float y, float z) {
                             return static_cast<float>(x * l0 + y * l1 + z * l2);
                           };
                           gb.color[idx] = {mix(ca.r, cb.r, cc.r), mix(ca.g, cb.g, cc.g), mix(ca.b, cb.b, cc.b),
                                            mix(ca.a, cb.a, cc.a)};
                         });
    }
  }

  const Mat4 identity;
  for (const auto& pc : prep.clouds) {
    const double square = 2.0 * pc.radius / view.pixel_size + 2.0;
    for (const auto& s : pc.cloud->surfels) {
      const Vec3d center = pc.to_local.transform_point(Vec3d(s.position));
      const Vec3d normal = normalize(pc.normal_to_local.transform_vector(Vec3d(s.normal)));
      if (config.cull_backfaces && dot(normal, view.forward) >= 0) continue;
      const Rgba color = to_rgba(s.color);
      splat_disc(view, identity, identity, center, normal, pc.radius, square,
                 [&](int px, int py, double depth, const Vec3d& hit) {
                   const std::size_t idx = gb.index(px, py);
                   const float d = static_cast<float>(depth);
                   if (!(d < gb.depth[idx])) return;
                   gb.depth[idx] = d;
                   gb.covered[idx] = 1;
                   gb.position[idx] = Vec3f(clamp_box.closest_point(hit));
                   gb.normal[idx] = Vec3f(normal);
                   gb.color[idx] = color;
                 });
    }
  }
  return gb;
}

}  // namespace

Box3 node_bounds_local(const Scene& scene, NodeId id) {
  const Mat4 world_to_node = scene.node(id).transform.affine_inverse();
  Box3 b;
  for (NodeId d : scene.post_order(id)) {
    const auto& n = scene.node(d);
    if (!n.mesh) continue;
    const Mat4 m = world_to_node * n.transform;
    for (const auto& v : n.mesh->vertices) b.extend(m.transform_point(Vec3d(v.position)));
  }
  return b;
}

ViewProjection fit_capture_view(const Box3& local_bounds, const Vec3d& direction, std::uint32_t resolution) {
  ViewProjection v;
  v.kind = ViewProjection::Kind::Orthographic;
  v.width = v.height = static_cast<int>(resolution);
  v.forward = normalize(direction);
  make_view_basis(v.forward, {0, 1, 0}, v.right, v.up);

  const Vec3d c = local_bounds.center();
  double umin = 0, umax = 0, vmin = 0, vmax = 0, dmin = 0;
  for (int i = 0; i < 8; ++i) {
    const Vec3d d = local_bounds.corner(i) - c;
    const double u = dot(d, v.right), w = dot(d, v.up), z = dot(d, v.forward);
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    vmin = std::min(vmin, w);
    vmax = std::max(vmax, w);
    dmin = std::min(dmin, z);
  }
  double side = std::max(umax - umin, vmax - vmin);
  if (!(side > 0)) side = 1.0;
  v.pixel_size = side / resolution;
  const double margin = 0.01 * side;
  v.eye = c + v.right * (0.5 * (umin + umax)) + v.up * (0.5 * (vmin + vmax)) + v.forward * (dmin - margin);
  return v;
}

GBuffer rasterize_direction(const Scene& scene, NodeId node, const Vec3d& direction, const CaptureConfig& config,
                            CaptureSource source) {
  if (!(length(direction) > 0)) throw Error("capture direction must be nonzero");
  return rasterize_prepared(prepare(scene, node, source), direction, config);
}

GBufferSet capture_gbuffers(const Scene& scene, NodeId node, const CaptureConfig& config, CaptureSource source) {
  if (config.resolution < 1) throw Error("capture resolution must be >= 1");
  const PreparedCapture prep = prepare(scene, node, source);
  const auto dirs = config.directions.empty() ? corner_directions(prep.bounds.empty() ? Box3({0, 0, 0}, {1, 1, 1})
                                                                                      : prep.bounds)
                                              : config.directions;
  GBufferSet out;
  out.reserve(dirs.size());
  for (const auto& d : dirs) out.push_back(rasterize_prepared(prep, d, config));
  return out;
}

void write_gbuffer_channel(const GBuffer& gb, GBufferChannel channel, const std::filesystem::path& path) {
  RgbImage img(gb.width, gb.height);
  float dmin = std::numeric_limits<float>::infinity(), dmax = -dmin;
  Box3 pb;
  for (std::size_t i = 0; i < gb.covered.size(); ++i) {
    if (!gb.covered[i]) continue;
    dmin = std::min(dmin, gb.depth[i]);
    dmax = std::max(dmax, gb.depth[i]);
    pb.extend(Vec3d(gb.position[i]));
  }
  const Vec3d pext = pb.empty() ? Vec3d{1, 1, 1} : pb.extent();
  for (int y = 0; y < gb.height; ++y)
    for (int x = 0; x < gb.width; ++x) {
      const auto i = gb.index(x, y);
      if (!gb.covered[i]) continue;
      switch (channel) {
        case GBufferChannel::Coverage: img.set(x, y, 1, 1, 1); break;
        case GBufferChannel::Position: {
          const Vec3d p = Vec3d(gb.position[i]) - pb.min;
          auto f = [](double a, double e) { return static_cast<float>(e > 0 ? a / e : 0.5); };
          img.set(x, y, f(p.x, pext.x), f(p.y, pext.y), f(p.z, pext.z));
          break;
        }
        case GBufferChannel::Normal: {
          const auto& n = gb.normal[i];
          img.set(x, y, 0.5f * (n.x + 1), 0.5f * (n.y + 1), 0.5f * (n.z + 1));
          break;
        }
        case GBufferChannel::Color: img.set(x, y, gb.color[i].r, gb.color[i].g, gb.color[i].b); break;
        case GBufferChannel::Depth: {
          const float g = dmax > dmin ? 1.0f - (gb.depth[i] - dmin) / (dmax - dmin) : 1.0f;
          img.set(x, y, g, g, g);
          break;
        }
      }
    }
  write_image(img, path);
}

}  // namespace pbs
