#include "pbs/procedural.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "pbs/error.hpp"

namespace pbs {

namespace {

// Colors go through RGBA8 so that meshes survive PLY round trips unchanged.
Rgba q8(Rgba c) { return to_rgba(to_rgba8(c)); }

Rgba hue(double h) {
  auto ch = [h](double off) {
    const double t = std::fmod(h + off, 1.0) * 6.0;
    const double v = t < 1 ? t : t < 3 ? 1 : t < 4 ? 4 - t : 0;
    return static_cast<float>(0.15 + 0.8 * v);
  };
  return {ch(0.0), ch(2.0 / 3.0), ch(1.0 / 3.0), 1.0f};
}

}  // namespace

TriangleMesh make_torus(double major_radius, double minor_radius, int segments_u, int segments_v) {
  if (segments_u < 3 || segments_v < 3) throw Error("torus needs at least 3 segments per direction");
  constexpr double tau = 2 * std::numbers::pi;
  TriangleMesh m;
  m.vertices.reserve(static_cast<std::size_t>(segments_u) * segments_v);
  for (int i = 0; i < segments_u; ++i) {
    const double u = tau * i / segments_u;
    for (int j = 0; j < segments_v; ++j) {
      const double v = tau * j / segments_v;
      const double ring = major_radius + minor_radius * std::cos(v);
      Vertex vx;
      vx.position = Vec3f(Vec3d{ring * std::cos(u), minor_radius * std::sin(v), ring * std::sin(u)});
      vx.normal = Vec3f(Vec3d{std::cos(v) * std::cos(u), std::sin(v), std::cos(v) * std::sin(u)});
      // Hue bands around the ring, darker stripes around the tube.
      Rgba c = hue(std::fmod(6.0 * u / tau, 1.0));
      const float shade = static_cast<float>(0.55 + 0.45 * (0.5 + 0.5 * std::cos(4 * v)));
      c.r *= shade;
      c.g *= shade;
      c.b *= shade;
      vx.color = q8(c);
      m.vertices.push_back(vx);
    }
  }
  auto id = [&](int i, int j) {
    return static_cast<std::uint32_t>((i % segments_u) * segments_v + (j % segments_v));
  };
  for (int i = 0; i < segments_u; ++i)
    for (int j = 0; j < segments_v; ++j) {
      const auto a = id(i, j), b = id(i, j + 1), c = id(i + 1, j), d = id(i + 1, j + 1);
      m.triangles.push_back({a, b, c});
      m.triangles.push_back({b, d, c});
    }
  return m;
}

TriangleMesh make_uv_sphere(double radius, int segments, int rings, Rgba color) {
  if (segments < 3 || rings < 2) throw Error("sphere needs at least 3 segments and 2 rings");
  const double pi = std::numbers::pi;
  TriangleMesh m;
  for (int i = 0; i <= segments; ++i) {
    const double phi = 2 * pi * i / segments;
    for (int j = 0; j <= rings; ++j) {
      const double theta = pi * j / rings;
      const Vec3d n{std::sin(theta) * std::cos(phi), std::cos(theta), std::sin(theta) * std::sin(phi)};
      Vertex v;
      v.position = Vec3f(n * radius);
      v.normal = Vec3f(n);
      const float band = (j / 2 + i / 4) % 2 ? 1.0f : 0.7f;
      v.color = q8({color.r * band, color.g * band, color.b * band, 1});
      m.vertices.push_back(v);
    }
  }
  auto id = [&](int i, int j) { return static_cast<std::uint32_t>(i * (rings + 1) + j); };
  for (int i = 0; i < segments; ++i)
    for (int j = 0; j < rings; ++j) {
      const auto a = id(i, j), b = id(i, j + 1), c = id(i + 1, j), d = id(i + 1, j + 1);
      if (j > 0) m.triangles.push_back({a, c, b});
      if (j + 1 < rings) m.triangles.push_back({b, c, d});
    }
  return m;
}

namespace {

void add_face(TriangleMesh& m, const Vec3d& center, const Vec3d& u, const Vec3d& v, Rgba color) {
  const Vec3d n = normalize(cross(u, v));
  const auto base = static_cast<std::uint32_t>(m.vertices.size());
  const Vec3d corners[4] = {center - u - v, center + u - v, center + u + v, center - u + v};
  for (const auto& c : corners) m.vertices.push_back({Vec3f(c), Vec3f(n), q8(color)});
  m.triangles.push_back({base, base + 1, base + 2});
  m.triangles.push_back({base, base + 2, base + 3});
}

}  // namespace

TriangleMesh make_box(const Vec3d& lo, const Vec3d& hi) {
  TriangleMesh m;
  const Vec3d c = (lo + hi) * 0.5, h = (hi - lo) * 0.5;
  const Vec3d X{h.x, 0, 0}, Y{0, h.y, 0}, Z{0, 0, h.z};
  add_face(m, c + X, Y, Z, {0.9f, 0.2f, 0.2f, 1});
  add_face(m, c - X, Z, Y, {0.2f, 0.8f, 0.8f, 1});
  add_face(m, c + Y, Z, X, {0.2f, 0.9f, 0.2f, 1});
  add_face(m, c - Y, X, Z, {0.8f, 0.2f, 0.8f, 1});
  add_face(m, c + Z, X, Y, {0.2f, 0.2f, 0.9f, 1});
  add_face(m, c - Z, Y, X, {0.8f, 0.8f, 0.2f, 1});
  return m;
}

TriangleMesh make_quad(double size, Rgba color) {
  TriangleMesh m;
  add_face(m, {0, 0, 0}, {0.5 * size, 0, 0}, {0, 0.5 * size, 0}, color);
  return m;
}

TriangleMesh make_ground(double size, int cells) {
  if (cells < 1) throw Error("ground needs at least one cell");
  TriangleMesh m;
  const double step = size / cells, h = 0.5 * step;
  for (int i = 0; i < cells; ++i)
    for (int k = 0; k < cells; ++k) {
      const Vec3d c{-0.5 * size + (i + 0.5) * step, 0, -0.5 * size + (k + 0.5) * step};
      const Rgba col = (i + k) % 2 ? Rgba{0.55f, 0.55f, 0.5f, 1} : Rgba{0.35f, 0.4f, 0.35f, 1};
      add_face(m, c, {0, 0, h}, {h, 0, 0}, col);
    }
  return m;
}

Scene make_single_mesh_scene(std::shared_ptr<const TriangleMesh> mesh, const Mat4& transform) {
  Scene s;
  s.set_root(s.add_leaf(std::move(mesh), transform, "mesh"));
  s.finalize();
  return s;
}

Scene make_grid_scene(std::shared_ptr<const TriangleMesh> mesh, int nx, int nz, double spacing, std::uint64_t seed,
                      bool ground) {
  if (nx < 1 || nz < 1) throw Error("grid scene needs at least one instance per axis");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi), scale(0.8, 1.2);
  std::vector<SceneNode> leaves;
  const Box3 mb = mesh->bounds();
  for (int i = 0; i < nx; ++i)
    for (int k = 0; k < nz; ++k) {
      const double s = scale(rng);
      const double a = angle(rng);
      const Vec3d pos{(i - 0.5 * (nx - 1)) * spacing, -mb.min.y * s, (k - 0.5 * (nz - 1)) * spacing};
      SceneNode n;
      n.mesh = mesh;
      n.transform = Mat4::translation(pos) * Mat4::rotation({0, 1, 0}, a) * Mat4::scale(s);
      n.name = "instance_" + std::to_string(i) + "_" + std::to_string(k);
      leaves.push_back(std::move(n));
    }
  if (ground) {
    SceneNode g;
    const double size = std::max(nx, nz) * spacing;
    g.mesh = std::make_shared<const TriangleMesh>(make_ground(size, std::max(nx, nz)));
    g.name = "ground";
    leaves.push_back(std::move(g));
  }
  return build_spatial_structure(std::move(leaves));
}

Scene make_named_scene(const std::string& name, std::uint64_t seed) {
  if (name == "torus") return make_single_mesh_scene(std::make_shared<const TriangleMesh>(make_torus()));
  if (name == "sphere") return make_single_mesh_scene(std::make_shared<const TriangleMesh>(make_uv_sphere(1.0, 128, 64)));
  if (name == "cube") return make_single_mesh_scene(std::make_shared<const TriangleMesh>(make_box()));
  if (name == "grid")
    return make_grid_scene(std::make_shared<const TriangleMesh>(make_torus(1.0, 0.35, 48, 24)), 8, 8, 3.0, seed);
  if (name == "city")
    return make_grid_scene(std::make_shared<const TriangleMesh>(make_torus(1.0, 0.35, 48, 24)), 16, 16, 3.0, seed);
  throw Error("unknown procedural scene '" + name + "' (expected torus, sphere, cube, grid or city)");
}

}  // namespace pbs
